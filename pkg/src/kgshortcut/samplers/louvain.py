"""Two-phase Louvain community detection on an :class:`UndirectedView`."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from numba import njit

from ..errors import UndefinedModularity
from ..graph import UndirectedView


@dataclass
class PartitionAssignment:
    community_of: np.ndarray
    community_count: int
    # modularity after each aggregation level, first entry = singletons
    history: list[float] = field(default_factory=list)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.community_of == c)


def relabel(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Dense community ids in order of first appearance by node id."""
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    return remap[inverse].astype(np.int64), len(order)


def _modularity_parts(indptr, indices, weights, loops, labels, k, resolution):
    """Modularity of a (possibly aggregated) graph with self-loop weights ``loops``."""
    deg = np.zeros(len(loops))
    np.add.at(deg, np.repeat(np.arange(len(loops)), np.diff(indptr)), weights)
    deg += 2.0 * loops
    two_m = deg.sum()
    if two_m == 0:
        raise UndefinedModularity("graph has no edges")
    rows = np.repeat(np.arange(len(loops)), np.diff(indptr))
    same = labels[rows] == labels[indices]
    # off-diagonal weights are stored twice, loops once
    w_in = np.bincount(labels[rows[same]], weights=weights[same], minlength=k) / 2.0
    w_in += np.bincount(labels, weights=loops, minlength=k)
    d_c = np.bincount(labels, weights=deg, minlength=k)
    m = two_m / 2.0
    return float(np.sum(w_in / m - resolution * (d_c / two_m) ** 2))


def modularity(view: UndirectedView, assignment: PartitionAssignment | np.ndarray, resolution: float = 1.0) -> float:
    """Q = sum_c [ w_in(c)/W - resolution * (d(c) / 2W)^2 ]."""
    labels = assignment.community_of if isinstance(assignment, PartitionAssignment) else np.asarray(assignment)
    labels, k = relabel(labels)
    return _modularity_parts(view.indptr, view.indices, view.fweights, np.zeros(view.n), labels, k, resolution)


@njit(cache=True)
def _local_moves(indptr, indices, weights, degree, order, resolution, two_m, min_gain):
    """Single-node moves until a full sweep changes nothing. Returns labels, moved?"""
    n = degree.shape[0]
    comm = np.arange(n)
    tot = degree.copy()
    neigh_w = np.zeros(n)
    neigh_c = np.empty(n, dtype=np.int64)
    any_move = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            ki = degree[i]
            # weights from i to each neighboring community
            nc = 0
            for j in range(indptr[i], indptr[i + 1]):
                c = comm[indices[j]]
                if neigh_w[c] == 0.0:
                    neigh_c[nc] = c
                    nc += 1
                neigh_w[c] += weights[j]
            tot[ci] -= ki
            best_c = ci
            best_gain = neigh_w[ci] - resolution * tot[ci] * ki / two_m
            for t in range(nc):
                c = neigh_c[t]
                gain = neigh_w[c] - resolution * tot[c] * ki / two_m
                if gain > best_gain + min_gain:
                    best_gain = gain
                    best_c = c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                improved = True
                any_move = True
            for t in range(nc):
                neigh_w[neigh_c[t]] = 0.0
            neigh_w[ci] = 0.0
    return comm, any_move


def _aggregate(indptr, indices, weights, loops, labels, k):
    n = len(loops)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    a = sp.csr_matrix((weights, (labels[rows], labels[indices])), shape=(k, k))
    a.sum_duplicates()
    diag = a.diagonal() / 2.0 + np.bincount(labels, weights=loops, minlength=k)
    a.setdiag(0)
    a.eliminate_zeros()
    a.sort_indices()
    return a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(np.float64), diag


def louvain_partition(view: UndirectedView, resolution: float = 1.0, seed: int | np.random.Generator = 0,
                      *, min_gain: float = 1e-7, max_levels: int = 100) -> PartitionAssignment:
    """Louvain: local moving then aggregation, until a level gains < ``min_gain``.

    Node sweep order in every level is a permutation drawn from ``seed``.
    Isolated nodes stay singleton communities.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = view.n
    membership = np.arange(n, dtype=np.int64)
    if view.total_weight == 0:
        return PartitionAssignment(membership, n, [])
    indptr, indices, weights = view.indptr, view.indices, view.fweights
    loops = np.zeros(n)
    two_m = float(view.degree.sum())
    k = n
    current = _modularity_parts(indptr, indices, weights, loops, np.arange(n), n, resolution)
    history = [current]
    for _ in range(max_levels):
        degree = np.zeros(k)
        np.add.at(degree, np.repeat(np.arange(k), np.diff(indptr)), weights)
        degree += 2.0 * loops
        order = rng.permutation(k).astype(np.int64)
        labels, moved = _local_moves(indptr, indices, weights, degree, order, resolution, two_m, 1e-12)
        if not moved:
            break
        labels, new_k = relabel(labels)
        q = _modularity_parts(indptr, indices, weights, loops, labels, new_k, resolution)
        if q < current:
            break
        membership = labels[membership]
        indptr, indices, weights, loops = _aggregate(indptr, indices, weights, loops, labels, new_k)
        gain = q - current
        current, k = q, new_k
        history.append(q)
        if gain < min_gain:
            break
    membership, count = relabel(membership)
    return PartitionAssignment(membership, count, history)
