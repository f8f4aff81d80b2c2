import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph, random_labeled
from kgshortcut.datasets import Task, validate_bundle
from kgshortcut.errors import InsufficientPartitions, SamplingFailed, SplitFailed
from kgshortcut.graph import build_graph, undirected_view
from kgshortcut.rng import stream
from kgshortcut.samplers.grail import GrailConfig, expand, grail_sample
from kgshortcut.samplers.ilpc import IlpcConfig, ilpc_sample
from kgshortcut.samplers.louvain import PartitionAssignment
from kgshortcut.samplers.partition import PartitionConfig, partition_sample, select_partitions
from kgshortcut.samplers.splits import degree_preserving_holdout, holdout_count, make_splits


def test_stream_is_named_and_reproducible():
    a = stream(3, "x").integers(0, 1 << 30, 5)
    assert np.array_equal(a, stream(3, "x").integers(0, 1 << 30, 5))
    assert not np.array_equal(a, stream(3, "y").integers(0, 1 << 30, 5))


# ---- neighborhood sampler -------------------------------------------------

def test_star_expansion_covers_star():
    g = build_graph([("hub", "r", f"l{i}") for i in range(8)])
    v = undirected_view(g)
    hub = g.entities.id("hub")
    assert len(expand(v, hub, 50, np.random.default_rng(0))) == 9
    assert len(expand(v, g.entities.id("l0"), 50, np.random.default_rng(0))) == 9


def test_expansion_respects_cap():
    g = build_graph([("hub", "r", f"l{i}") for i in range(20)])
    v = undirected_view(g)
    got = expand(v, g.entities.id("hub"), 5, np.random.default_rng(0))
    assert len(got) == 6


def _grail_invariants(graph, bundle):
    inf = bundle.inference[0].graph
    assert not set(bundle.train.entities.labels) & set(inf.entities.labels)
    assert inf.relation_labels_used() <= bundle.train.relation_labels_used()
    parent = set(graph.labeled())
    assert set(bundle.train.labeled()) <= parent
    assert set(inf.labeled()) <= parent


@pytest.mark.parametrize("seed", range(5))
def test_grail_invariants(seed):
    g = random_graph(300, 900, relations=4, seed=seed)
    b = grail_sample(g, GrailConfig(3, 5, 10, 10, rng_seed=seed))
    _grail_invariants(g, b)


def test_grail_deterministic():
    g = random_graph(300, 900, seed=1)
    a = grail_sample(g, GrailConfig(rng_seed=4))
    b = grail_sample(g, GrailConfig(rng_seed=4))
    assert a.train.labeled() == b.train.labeled()
    assert a.inference[0].graph.labeled() == b.inference[0].graph.labeled()


def test_grail_train_is_induced():
    g = random_graph(200, 700, seed=2)
    b = grail_sample(g, GrailConfig(2, 4, 8, 8, rng_seed=0))
    ents = set(b.train.entities.labels)
    expected = {t for t in g.labeled() if t[0] in ents and t[2] in ents}
    assert set(b.train.labeled()) == expected


def test_grail_fails_when_nothing_left():
    g = build_graph([("a", "r", "b"), ("b", "r", "c")])
    with pytest.raises(SamplingFailed):
        grail_sample(g, GrailConfig(5, 5, 50, 50))


# ---- node split -----------------------------------------------------------

def test_ilpc_two_triangles_counts():
    tri = [("a", "r", "b"), ("b", "r", "c"), ("c", "r", "a"), ("x", "r", "y"), ("y", "r", "z"), ("z", "r", "x")]
    g = build_graph(tri + [("a", "r", "x")])
    b = ilpc_sample(g, IlpcConfig(0.5, rng_seed=0))
    total = len(b.train) + len(b.inference[0].graph) + b.generator["discarded_cross_triples"]
    assert total == len(g)


@pytest.mark.parametrize("seed", range(20))
def test_ilpc_against_brute_force(seed):
    labeled = random_labeled(20, 60, relations=2, seed=seed)
    g = build_graph(labeled)
    try:
        b = ilpc_sample(g, IlpcConfig(0.5, rng_seed=seed))
    except SamplingFailed:
        return
    train_ents = set(b.train.entities.labels)
    inf_ents = set(b.inference[0].graph.entities.labels)
    assert not train_ents & inf_ents
    # replay the node draw and classify every triple by hand
    n_train = int(np.floor(0.5 * g.num_entities + 0.5))
    picked = set(stream(seed, "ilpc-nodes").permutation(g.num_entities)[:n_train].tolist())
    side = {g.entities.labels[e]: e in picked for e in range(g.num_entities)}
    cross = sum(1 for h, _, t in g.labeled() if side[h] != side[t])
    assert cross == b.generator["discarded_cross_triples"]
    assert set(b.train.labeled()) == {x for x in g.labeled() if side[x[0]] and side[x[2]]}


def test_ilpc_drops_unseen_relations():
    g = random_graph(100, 300, relations=6, seed=3)
    b = ilpc_sample(g, IlpcConfig(0.5, rng_seed=1))
    assert b.inference[0].graph.relation_labels_used() <= b.train.relation_labels_used()


# ---- holdout --------------------------------------------------------------

def test_holdout_triangle():
    g = build_graph([("a", "r", "b"), ("b", "r", "c"), ("c", "r", "a")])
    held, short = degree_preserving_holdout(g, 1 / 3, np.random.default_rng(0))
    assert held.sum() == 1 and short == 0


def test_holdout_star_records_shortfall():
    g = build_graph([("hub", "r", f"l{i}") for i in range(10)])
    held, short = degree_preserving_holdout(g, 0.5, np.random.default_rng(0))
    assert held.sum() == 0
    assert short == 5


def test_holdout_too_small():
    with pytest.raises(SplitFailed):
        degree_preserving_holdout(build_graph([("a", "r", "b")]), 0.1, np.random.default_rng(0))


@given(st.integers(0, 500), st.sampled_from([0.05, 0.1, 0.2]))
def test_holdout_never_strands_entities(seed, fraction):
    g = random_graph(40, 200, seed=seed % 40)
    held, short = degree_preserving_holdout(g, fraction, np.random.default_rng(seed), keep_relations=True)
    kept = g.triples[~held]
    ents = set(kept[:, 0].tolist()) | set(kept[:, 2].tolist())
    assert ents == set(g.triples[:, 0].tolist()) | set(g.triples[:, 2].tolist())
    assert set(kept[:, 1].tolist()) == set(g.triples[:, 1].tolist())
    assert held.sum() + short == holdout_count(fraction, len(g))


def test_holdout_exact_on_dense_graph():
    # dense enough that no constraint binds
    labeled = [(f"e{i}", f"r{(i + j) % 3}", f"e{j}") for i in range(20) for j in range(20) if i != j]
    g = build_graph(labeled)
    held, short = degree_preserving_holdout(g, 0.1, np.random.default_rng(0))
    assert short == 0 and held.sum() == 38


def test_make_splits_bundle_is_valid():
    g1 = random_graph(60, 300, seed=1)
    g2 = build_graph([("z" + h, r, "z" + t) for h, r, t in random_graph(60, 300, seed=2).labeled()])
    b = make_splits(g1, [g2], seed=3, task=Task.E)
    assert validate_bundle(b) == []
    assert b.generator["splits"]["shortfall"]["inference_1"] == 0
    assert len(b.inference[0].test) == holdout_count(0.1, len(g2))


# ---- partition sampler ------------------------------------------------------

def _blocks(sizes, rel_of=None, seed=0, p=0.3):
    rng = np.random.default_rng(seed)
    out = []
    for b, size in enumerate(sizes):
        for i in range(size):
            for j in range(i + 1, size):
                if rng.random() < p:
                    r = rel_of(b, i, j) if rel_of else f"r{(i * j) % 3}"
                    out.append((f"b{b}_{i}", r, f"b{b}_{j}"))
    return out


def _block_assignment(graph):
    labels = np.array([int(lbl.split("_")[0][1:]) for lbl in graph.entities.labels])
    return PartitionAssignment(labels, int(labels.max()) + 1)


def test_disconnected_blocks_become_graphs():
    g = build_graph(_blocks([40, 30, 30]))
    cfg = PartitionConfig(k=3, min_edges=50, rng_seed=0)
    bundle, report = partition_sample(g, cfg, name="blocks")
    assert validate_bundle(bundle) == []
    assert len(bundle.inference) == 2
    assert [c["status"] for c in report["candidates"]].count("train") == 1
    assert bundle.train.num_entities == 40
    sizes = sorted(inf.graph.num_entities for inf in bundle.inference)
    assert sizes == [30, 30]


def test_task_e_without_new_relations_removes_nothing():
    g = build_graph(_blocks([40, 30, 30]))
    _, _, report = select_partitions(g, _block_assignment(g), PartitionConfig(k=3, min_edges=50))
    assert all("removed_new_relation_triples" not in c for c in report["candidates"])


def test_task_e_relation_removal_and_rejection():
    def rel_of(b, i, j):
        if b == 1 and i == 0 and j < 4:
            return "rare"  # a handful of triples, under the threshold
        if b == 2 and (i + j) % 2:
            return "novel"  # about half the block, over the threshold
        return f"r{(i * j) % 3}"

    g = build_graph(_blocks([40, 30, 30, 30], rel_of))
    train, infs, report = select_partitions(g, _block_assignment(g), PartitionConfig(k=3, min_edges=50))
    status = {c["community"]: c for c in report["candidates"]}
    assert status[2]["status"] == "too_many_new_relations"
    assert status[1]["removed_new_relation_triples"] >= 1
    for inf in infs:
        assert inf.relation_labels_used() <= train.relation_labels_used()
    with pytest.raises(InsufficientPartitions):
        g3 = build_graph(_blocks([40, 30, 30], rel_of))
        select_partitions(g3, _block_assignment(g3), PartitionConfig(k=3, min_edges=50))


def test_task_er_keeps_new_relations():
    def rel_of(b, i, j):
        return "novel" if b == 2 and (i + j) % 2 else f"r{(i * j) % 3}"

    g = build_graph(_blocks([40, 30, 30], rel_of))
    _, infs, _ = select_partitions(g, _block_assignment(g), PartitionConfig(k=3, task="er", min_edges=50))
    assert any("novel" in inf.relation_labels_used() for inf in infs)


def test_insufficient_partitions_reports_sizes():
    g = build_graph(_blocks([40, 10]))
    with pytest.raises(InsufficientPartitions) as info:
        select_partitions(g, _block_assignment(g), PartitionConfig(k=3, min_edges=50))
    assert len(info.value.candidate_sizes) == 1


def test_partition_selection_prefers_parent_like_delta():
    g = build_graph(_blocks([40, 30, 30, 30], seed=5))
    cfg = PartitionConfig(k=2, min_edges=50, parent_delta_spd=0.0)
    _, _, report = select_partitions(g, _block_assignment(g), cfg)
    scored = [c for c in report["candidates"] if "deviation" in c]
    chosen = [c for c in scored if c["status"] == "inference_1"][0]
    assert chosen["deviation"] == min(c["deviation"] for c in scored)


def test_partition_sample_deterministic():
    g = build_graph(_blocks([40, 30, 30], seed=2))
    cfg = PartitionConfig(k=3, min_edges=50, rng_seed=9)
    a, ra = partition_sample(g, cfg)
    b, rb = partition_sample(g, cfg)
    assert a.train.labeled() == b.train.labeled()
    assert [x.test.tolist() for x in a.inference] == [x.test.tolist() for x in b.inference]
    assert ra == rb
