"""Legacy neighborhood sampling: capped 2-hop expansions around random seeds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datasets import DatasetBundle, InferenceGraph, Task
from ..errors import SamplingFailed
from ..graph import KnowledgeGraph, UndirectedView, undirected_view
from ..rng import stream

HOPS = 2


@dataclass(frozen=True)
class GrailConfig:
    train_seed_entities: int = 10
    inf_seed_entities: int = 20
    max_train_hop_cap: int = 50
    max_inf_hop_cap: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("train_seed_entities", "inf_seed_entities", "max_train_hop_cap", "max_inf_hop_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def as_dict(self) -> dict:
        return {"train_seeds": self.train_seed_entities, "inf_seeds": self.inf_seed_entities,
                "cap_train": self.max_train_hop_cap, "cap_inf": self.max_inf_hop_cap, "hops": HOPS}


def expand(view: UndirectedView, seed: int, cap: int, rng: np.random.Generator, hops: int = HOPS) -> np.ndarray:
    """Entities reached from ``seed`` admitting at most ``cap`` new ones per hop."""
    visited = {seed}
    frontier = np.array([seed], dtype=np.int64)
    for _ in range(hops):
        if len(frontier) == 0:
            break
        nb = np.unique(np.concatenate([view.neighbors(u) for u in frontier.tolist()]))
        fresh = np.array([v for v in nb.tolist() if v not in visited], dtype=np.int64)
        if len(fresh) > cap:
            fresh = np.sort(rng.choice(fresh, size=cap, replace=False))
        visited.update(fresh.tolist())
        frontier = fresh
    return np.fromiter(sorted(visited), dtype=np.int64)


def neighborhood_entities(view: UndirectedView, candidates: np.ndarray, k: int, cap: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Boolean mask of the union of capped neighborhoods of ``k`` random seeds."""
    if len(candidates) == 0:
        raise SamplingFailed("no entities left to seed from")
    seeds = rng.choice(candidates, size=min(k, len(candidates)), replace=False)
    mask = np.zeros(view.n, dtype=bool)
    for s in seeds.tolist():
        mask[expand(view, s, cap, rng)] = True
    return mask


def grail_sample(graph: KnowledgeGraph, cfg: GrailConfig = GrailConfig(), name: str = "grail") -> DatasetBundle:
    """Train graph from seed neighborhoods, inference graph likewise from the rest.

    The returned bundle has no validation or test triples yet.
    """
    trip = graph.triples
    full = undirected_view(graph, unit_weights=True)
    has_edge = full.degree > 0
    train_ents = neighborhood_entities(full, np.flatnonzero(has_edge), cfg.train_seed_entities,
                                       cfg.max_train_hop_cap, stream(cfg.rng_seed, "grail-train"))
    in_train = train_ents[trip[:, 0]] & train_ents[trip[:, 2]]
    train = graph.subgraph(in_train)
    if len(train) == 0:
        raise SamplingFailed("train graph is empty")

    rest = ~in_train
    rest_view = undirected_view(graph, rest, unit_weights=True)
    seedable = np.flatnonzero((rest_view.degree > 0) & ~train_ents)
    inf_ents = neighborhood_entities(rest_view, seedable, cfg.inf_seed_entities, cfg.max_inf_hop_cap,
                                     stream(cfg.rng_seed, "grail-inference"))
    inf_ents &= ~train_ents
    train_rels = np.zeros(graph.num_relations, dtype=bool)
    train_rels[trip[in_train, 1]] = True
    keep = rest & inf_ents[trip[:, 0]] & inf_ents[trip[:, 2]] & train_rels[trip[:, 1]]
    inference = graph.subgraph(keep)
    if len(inference) == 0:
        raise SamplingFailed("inference graph is empty")
    gen = {"procedure": "grail", "seed": cfg.rng_seed, "parameters": cfg.as_dict()}
    return DatasetBundle(name, Task.E, train, np.zeros((0, 3)), [InferenceGraph(inference, np.zeros((0, 3)))],
                         generator=gen)
