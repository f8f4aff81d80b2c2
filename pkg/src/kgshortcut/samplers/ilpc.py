"""Node-split sampling: a random share of entities induces the train graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datasets import DatasetBundle, InferenceGraph, Task
from ..errors import SamplingFailed
from ..graph import KnowledgeGraph
from ..rng import stream


@dataclass(frozen=True)
class IlpcConfig:
    train_node_fraction: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_node_fraction < 1.0:
            raise ValueError("train_node_fraction must be in (0, 1)")


def ilpc_sample(graph: KnowledgeGraph, cfg: IlpcConfig = IlpcConfig(), name: str = "ilpc") -> DatasetBundle:
    n = graph.num_entities
    rng = stream(cfg.rng_seed, "ilpc-nodes")
    n_train = int(np.floor(cfg.train_node_fraction * n + 0.5))
    in_train = np.zeros(n, dtype=bool)
    in_train[rng.permutation(n)[:n_train]] = True
    trip = graph.triples
    h_train, t_train = in_train[trip[:, 0]], in_train[trip[:, 2]]
    train_mask = h_train & t_train
    train = graph.subgraph(train_mask)
    train_rels = np.zeros(graph.num_relations, dtype=bool)
    train_rels[trip[train_mask, 1]] = True
    inf_mask = ~h_train & ~t_train & train_rels[trip[:, 1]]
    inference = graph.subgraph(inf_mask)
    if len(train) == 0 or len(inference) == 0:
        raise SamplingFailed(f"empty induced graph (train {len(train)}, inference {len(inference)} triples)")
    gen = {
        "procedure": "ilpc",
        "seed": cfg.rng_seed,
        "parameters": {"p": cfg.train_node_fraction},
        "discarded_cross_triples": int(np.count_nonzero(h_train != t_train)),
    }
    return DatasetBundle(name, Task.E, train, np.zeros((0, 3)), [InferenceGraph(inference, np.zeros((0, 3)))],
                         generator=gen)
