"""Small synthetic knowledge graphs with planted community structure."""
from __future__ import annotations

import numpy as np

from .graph import KnowledgeGraph, build_graph


def planted_partition_kg(blocks: int = 6, block_size: int = 120, p_in: float = 0.06, p_out: float = 0.002,
                         relations: int = 8, seed: int = 0) -> KnowledgeGraph:
    """Stochastic block model with random relation labels and orientation."""
    rng = np.random.default_rng(seed)
    n = blocks * block_size
    block = np.repeat(np.arange(blocks), block_size)
    iu, ju = np.triu_indices(n, k=1)
    p = np.where(block[iu] == block[ju], p_in, p_out)
    hit = rng.random(len(iu)) < p
    u, v = iu[hit], ju[hit]
    flip = rng.random(len(u)) < 0.5
    heads = np.where(flip, v, u)
    tails = np.where(flip, u, v)
    rels = rng.integers(0, relations, len(u))
    return build_graph((f"e{h}", f"r{r}", f"e{t}") for h, r, t in zip(heads.tolist(), rels.tolist(), tails.tolist()))


def geometric_kg(n: int = 4000, radius: float = 0.025, shortcut_fraction: float = 0.15, relations: int = 12,
                 seed: int = 0) -> KnowledgeGraph:
    """Random geometric graph in the unit square plus uniform long-range edges.

    Nearby entities link, so test answers sit close to their queries, while
    the long-range edges keep the whole graph a small world.
    """
    from scipy.spatial import cKDTree

    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    near = np.array(sorted(cKDTree(pts).query_pairs(radius)), dtype=np.int64).reshape(-1, 2)
    far = rng.integers(0, n, (int(shortcut_fraction * len(near)), 2))
    edges = np.vstack([near, far[far[:, 0] != far[:, 1]]])
    rels = rng.integers(0, relations, len(edges))
    return build_graph((f"e{h}", f"r{r}", f"e{t}") for (h, t), r in zip(edges.tolist(), rels.tolist()))
