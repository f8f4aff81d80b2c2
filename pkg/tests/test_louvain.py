import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_graph
from kgshortcut.errors import UndefinedModularity
from kgshortcut.graph import build_graph, undirected_view
from kgshortcut.samplers.louvain import louvain_partition, modularity, relabel
from kgshortcut.synthetic import planted_partition_kg


def naive_modularity(view, labels, resolution=1.0):
    """Pairwise definition: (1/2m) sum_ij [A_ij - g k_i k_j / 2m] [c_i == c_j]."""
    a = view.to_scipy().toarray()
    k = a.sum(axis=1)
    two_m = k.sum()
    q = 0.0
    for i in range(view.n):
        for j in range(view.n):
            if labels[i] == labels[j]:
                q += a[i, j] - resolution * k[i] * k[j] / two_m
    return q / two_m


def set_partitions(n):
    """Restricted growth strings: every set partition of range(n) once."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield list(prefix)
            return
        for c in range(top + 2):
            yield from rec(prefix + [c], max(top, c))
    yield from rec([0], 0)


def _view(edges):
    return undirected_view(build_graph([(f"n{u}", "r", f"n{v}") for u, v in edges]), unit_weights=True)


TRIANGLES = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]
BARBELL = [(i, j) for i in range(4) for j in range(i + 1, 4)] + \
          [(i, j) for i in range(4, 8) for j in range(i + 1, 8)] + [(3, 4)]


def test_two_triangles():
    v = _view(TRIANGLES)
    part = louvain_partition(v, seed=0)
    assert part.community_count == 2
    assert len(set(part.community_of[:3])) == 1
    assert modularity(v, part) == pytest.approx(0.5, abs=1e-12)


def test_single_community_is_zero():
    v = _view(BARBELL)
    assert modularity(v, np.zeros(v.n, dtype=np.int64)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_barbell_reaches_brute_force_optimum(seed):
    v = _view(BARBELL)
    best = max(naive_modularity(v, p) for p in set_partitions(v.n))
    part = louvain_partition(v, seed=seed)
    assert modularity(v, part) == pytest.approx(best, abs=1e-12)
    assert part.community_count == 2


@pytest.mark.parametrize("resolution", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("seed", range(6))
def test_modularity_matches_pairwise_definition(seed, resolution):
    v = undirected_view(random_graph(30, 80, seed=seed))
    labels = np.random.default_rng(seed).integers(0, 4, v.n)
    assert modularity(v, labels, resolution) == pytest.approx(naive_modularity(v, labels, resolution), abs=1e-12)


@given(st.integers(0, 10_000))
def test_louvain_improves_on_singletons(seed):
    v = undirected_view(random_graph(60, 150, seed=seed % 50))
    part = louvain_partition(v, seed=seed)
    singletons = modularity(v, np.arange(v.n))
    q = modularity(v, part)
    assert q >= singletons - 1e-12
    assert all(b >= a for a, b in zip(part.history, part.history[1:]))
    assert part.history[-1] == pytest.approx(q, abs=1e-9)


def test_planted_blocks_are_recovered():
    g = planted_partition_kg(blocks=4, block_size=40, p_in=0.3, p_out=0.005, seed=1)
    v = undirected_view(g, unit_weights=True)
    part = louvain_partition(v, seed=3)
    truth = np.array([int(lbl[1:]) // 40 for lbl in g.entities.labels])
    # each planted block should sit almost entirely in one community
    for b in range(4):
        counts = np.bincount(part.community_of[truth == b])
        assert counts.max() >= 0.9 * counts.sum()


def test_deterministic_for_seed():
    v = undirected_view(random_graph(80, 240, seed=2))
    a, b = louvain_partition(v, seed=11), louvain_partition(v, seed=11)
    assert np.array_equal(a.community_of, b.community_of)


def test_isolated_nodes_stay_singletons():
    g = build_graph([("a", "r", "b"), ("b", "r", "c"), ("c", "r", "a"), ("z", "r", "z")])
    part = louvain_partition(undirected_view(g), seed=0)
    z = g.entities.id("z")
    assert np.count_nonzero(part.community_of == part.community_of[z]) == 1


def test_edgeless_graph_raises():
    v = undirected_view(build_graph([("a", "r", "a")]))
    with pytest.raises(UndefinedModularity):
        modularity(v, np.zeros(1, dtype=np.int64))


def test_relabel_first_appearance():
    labels, k = relabel(np.array([7, 7, 3, 9, 3]))
    assert labels.tolist() == [0, 0, 1, 2, 1]
    assert k == 3
