"""Random hold-out of test/validation triples that never strands an entity."""
from __future__ import annotations

import numpy as np

from ..datasets import DatasetBundle, InferenceGraph, Task, graph_with_holdout
from ..errors import SplitFailed
from ..graph import KnowledgeGraph
from ..rng import stream


def holdout_count(fraction: float, m: int) -> int:
    return int(np.floor(fraction * m + 0.5))


def degree_preserving_holdout(graph: KnowledgeGraph, fraction: float, rng: np.random.Generator,
                              keep_relations: bool = False):
    """Pick ``round(fraction * m)`` triples uniformly at random, skipping any
    pick that would leave one of its entities without incident triples (or,
    with ``keep_relations``, remove the last triple of a relation).

    Returns ``(held_mask, shortfall)``.
    """
    m = len(graph)
    target = holdout_count(fraction, m)
    if m < 2 or target < 1:
        raise SplitFailed(f"graph with {m} triples is too small to hold out a {fraction:g} fraction")
    trip = graph.triples
    incident = np.bincount(trip[:, 0], minlength=graph.num_entities)
    incident += np.bincount(trip[:, 2], minlength=graph.num_entities)
    # a self-loop triple is one incidence, not two
    loops = trip[:, 0] == trip[:, 2]
    incident -= np.bincount(trip[loops, 0], minlength=graph.num_entities)
    rel_count = np.bincount(trip[:, 1], minlength=graph.num_relations)
    min_rel = 2 if keep_relations else 0
    held = np.zeros(m, dtype=bool)
    taken = 0
    for i in rng.permutation(m).tolist():
        h, t = int(trip[i, 0]), int(trip[i, 2])
        if incident[h] < 2 or incident[t] < 2 or rel_count[trip[i, 1]] < min_rel:
            continue
        held[i] = True
        rel_count[trip[i, 1]] -= 1
        incident[h] -= 1
        if t != h:
            incident[t] -= 1
        taken += 1
        if taken == target:
            break
    return held, target - taken


def split_graph(graph: KnowledgeGraph, fraction: float, rng: np.random.Generator, keep_relations: bool = False):
    """Return (graph without held-out triples, held-out ids in its vocab, shortfall)."""
    held, shortfall = degree_preserving_holdout(graph, fraction, rng, keep_relations)
    kept_l = graph.labeled(graph.triples[~held])
    held_l = graph.labeled(graph.triples[held])
    g, encoded = graph_with_holdout(kept_l, held_l)
    return g, encoded, shortfall


def make_splits(train: KnowledgeGraph, inference_graphs: list[KnowledgeGraph], *, test_fraction: float = 0.1,
                valid_fraction: float = 0.1, seed: int = 0, task: Task | str = Task.E, name: str = "dataset",
                generator: dict | None = None) -> DatasetBundle:
    """Hold out validation triples from ``train`` and test triples from each inference graph."""
    if not inference_graphs:
        raise SplitFailed("no inference graphs to split")
    train_g, valid, train_short = split_graph(train, valid_fraction, stream(seed, "holdout-valid"),
                                              keep_relations=True)
    inference = []
    shortfalls = {"valid": train_short}
    for i, g in enumerate(inference_graphs, start=1):
        inf_g, test, short = split_graph(g, test_fraction, stream(seed, f"holdout-test-{i}"))
        inference.append(InferenceGraph(inf_g, test, name=f"inference_{i}"))
        shortfalls[f"inference_{i}"] = short
    gen = dict(generator or {})
    gen["splits"] = {"test_fraction": test_fraction, "valid_fraction": valid_fraction, "shortfall": shortfalls}
    return DatasetBundle(name, task, train_g, valid, inference, generator=gen)
