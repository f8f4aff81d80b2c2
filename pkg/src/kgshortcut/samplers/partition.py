"""Partition-based inductive splits: Louvain communities become whole graphs.

One community (the largest qualifying one) becomes the train graph, and
the communities whose test-query distance profile is closest to the
parent graph's become the inference graphs.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..datasets import DatasetBundle, InferenceGraph, Task, new_relation_fraction
from ..errors import DegenerateReport, InsufficientPartitions, SplitFailed
from ..graph import KnowledgeGraph, undirected_view
from ..ppr import PprConfig
from ..ranking import Heuristic, metrics_from_ties, rank_inference_graph
from ..rng import stream
from ..spd import delta_spd
from .louvain import PartitionAssignment, louvain_partition
from .splits import make_splits, split_graph


@dataclass(frozen=True)
class PartitionConfig:
    k: int = 3
    task: Task = Task.E
    resolution: float = 1.0
    min_edges: int = 1000
    new_rel_threshold: float = 0.05
    test_fraction: float = 0.10
    valid_fraction: float = 0.10
    rng_seed: int = 0
    # known parent delta-SPD; estimated from a hold-out of the parent when None
    parent_delta_spd: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "task", Task.parse(self.task))
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.task is Task.TRANSDUCTIVE:
            raise ValueError("partition sampling builds inductive (e / er) datasets")
        for f in (self.test_fraction, self.valid_fraction):
            if not 0.0 < f <= 0.5:
                raise ValueError("split fractions must lie in (0, 0.5]")
        if not 0.0 <= self.new_rel_threshold <= 1.0:
            raise ValueError("new_rel_threshold must lie in [0, 1]")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["task"] = self.task.value
        return d


def largest_component(graph: KnowledgeGraph) -> np.ndarray:
    """Triple mask of the connected component with the most entities."""
    if len(graph) == 0:
        return np.zeros(0, dtype=bool)
    view = undirected_view(graph, unit_weights=True)
    present = np.zeros(graph.num_entities, dtype=bool)
    present[graph.triples[:, 0]] = True
    present[graph.triples[:, 2]] = True
    _, labels = connected_components(view.to_scipy(), directed=False)
    sizes = np.bincount(labels[present])
    best = int(np.argmax(sizes))
    return labels[graph.triples[:, 0]] == best


def estimate_delta_spd(graph: KnowledgeGraph, fraction: float, rng: np.random.Generator) -> float:
    held_graph, test, _ = split_graph(graph, fraction, rng)
    return delta_spd(InferenceGraph(held_graph, test))


def _ppr_hits10(graph: KnowledgeGraph, fraction: float, rng: np.random.Generator, cfg: PprConfig) -> float:
    held_graph, test, _ = split_graph(graph, fraction, rng)
    greater, ties = rank_inference_graph(InferenceGraph(held_graph, test), Heuristic.PPR, cfg)
    return metrics_from_ties(greater, ties)["hits_at_10"]


def select_partitions(graph: KnowledgeGraph, assignment: PartitionAssignment, cfg: PartitionConfig,
                      ppr_cfg: PprConfig = PprConfig()):
    """Choose the train graph and ``k - 1`` inference graphs among communities.

    Returns ``(train, inference_graphs, report)``; ``report`` records every
    candidate and why it was kept or rejected.
    """
    trip = graph.triples
    comm = assignment.community_of
    ch, ct = comm[trip[:, 0]], comm[trip[:, 2]]
    intra = ch == ct
    report = {
        "communities": int(assignment.community_count),
        "cross_triples_dropped": int(np.count_nonzero(~intra)),
        "candidates": [],
    }

    candidates = []
    order = np.argsort(ch, kind="stable")
    order = order[intra[order]]
    cids, starts = np.unique(ch[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    for c, s, e in zip(cids.tolist(), starts.tolist(), bounds):
        mask = np.zeros(len(trip), dtype=bool)
        mask[order[s:e]] = True
        sub = graph.subgraph(mask)
        lcc = largest_component(sub)
        reduced = sub.subgraph(lcc) if not lcc.all() else sub
        entry = {
            "community": c,
            "triples": len(reduced),
            "entities": reduced.num_entities,
            "lcc_dropped_triples": int(len(sub) - len(reduced)),
            "status": "candidate",
        }
        report["candidates"].append(entry)
        if len(reduced) < cfg.min_edges:
            entry["status"] = "below_min_edges"
            continue
        candidates.append((c, reduced, entry))

    sizes = sorted((len(g) for _, g, _ in candidates), reverse=True)
    if len(candidates) < cfg.k:
        raise InsufficientPartitions(f"need {cfg.k} partitions with >= {cfg.min_edges} triples", sizes)

    candidates.sort(key=lambda x: (-len(x[1]), x[0]))
    train_c, train, train_entry = candidates[0]
    train_entry["status"] = "train"
    train_rels = train.relation_labels_used()

    if cfg.parent_delta_spd is not None:
        parent_delta = float(cfg.parent_delta_spd)
    else:
        parent_delta = estimate_delta_spd(graph, cfg.test_fraction, stream(cfg.rng_seed, "parent-delta-spd"))
    report["parent_delta_spd"] = parent_delta

    scored = []
    for c, g, entry in candidates[1:]:
        rels = g.relations.labels
        new_rel = np.array([rels[r] not in train_rels for r in g.triples[:, 1].tolist()])
        entry["new_relation_fraction"] = new_relation_fraction(train, g)
        entry["new_relation_triple_fraction"] = float(new_rel.mean())
        if cfg.task is Task.E and new_rel.any():
            if new_rel.mean() > cfg.new_rel_threshold:
                entry["status"] = "too_many_new_relations"
                continue
            g = g.subgraph(~new_rel)
            entry["removed_new_relation_triples"] = int(new_rel.sum())
            if len(g) < cfg.min_edges:
                entry["status"] = "below_min_edges_after_relation_removal"
                continue
        try:
            d = estimate_delta_spd(g, cfg.test_fraction, stream(cfg.rng_seed, f"candidate-{c}"))
        except (SplitFailed, DegenerateReport) as exc:
            entry["status"] = f"unscorable: {exc}"
            continue
        entry["delta_spd"] = d
        entry["deviation"] = abs(d - parent_delta)
        scored.append([entry["deviation"], 0.0, c, g, entry])

    # PPR deviation only matters between exactly tied delta-SPD deviations
    devs = [s[0] for s in scored]
    tied = {d for d in devs if devs.count(d) > 1}
    if tied:
        parent_hits = _ppr_hits10(graph, cfg.test_fraction, stream(cfg.rng_seed, "parent-ppr"), ppr_cfg)
        report["parent_ppr_hits_at_10"] = parent_hits
        for s in scored:
            if s[0] in tied:
                h = _ppr_hits10(s[3], cfg.test_fraction, stream(cfg.rng_seed, f"candidate-ppr-{s[2]}"), ppr_cfg)
                s[4]["ppr_hits_at_10"] = h
                s[1] = abs(h - parent_hits)
    scored.sort(key=lambda s: (s[0], s[1], s[2]))

    if len(scored) < cfg.k - 1:
        raise InsufficientPartitions(
            f"only {len(scored)} inference candidates qualify, need {cfg.k - 1}", sizes)
    chosen = scored[: cfg.k - 1]
    for rank, s in enumerate(chosen, start=1):
        s[4]["status"] = f"inference_{rank}"
    for s in scored[cfg.k - 1:]:
        s[4]["status"] = "not_selected"
    report["train_community"] = train_c
    report["inference_communities"] = [s[2] for s in chosen]
    return train, [s[3] for s in chosen], report


def partition_sample(graph: KnowledgeGraph, cfg: PartitionConfig = PartitionConfig(), name: str = "partition",
                     ppr_cfg: PprConfig = PprConfig()) -> tuple[DatasetBundle, dict]:
    """Full pipeline: Louvain, partition selection, then the test/valid split."""
    view = undirected_view(graph)
    assignment = louvain_partition(view, cfg.resolution, stream(cfg.rng_seed, "louvain"))
    train, inference, report = select_partitions(graph, assignment, cfg, ppr_cfg)
    report["modularity"] = assignment.history[-1] if assignment.history else None
    gen = {"procedure": "partition", "seed": cfg.rng_seed, "parameters": cfg.as_dict()}
    bundle = make_splits(train, inference, test_fraction=cfg.test_fraction, valid_fraction=cfg.valid_fraction,
                         seed=cfg.rng_seed, task=cfg.task, name=name, generator=gen)
    return bundle, report
