"""Personalized PageRank on an :class:`UndirectedView`.

Two routes are provided: a dense power-iteration solver used as the
reference, and a local push approximation (FIFO order) used for ranking
at scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError
from .graph import UndirectedView


@dataclass(frozen=True)
class PprConfig:
    alpha: float = 0.15
    epsilon: float = 1e-7
    max_iter_exact: int = 10_000
    oracle_tol: float = 1e-12
    # force every undirected edge to weight 1 instead of its triple multiplicity
    unit_weights: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass
class PprVector:
    source: int
    scores: np.ndarray
    residual_mass: float = 0.0
    pushes: int = 0

    def entries(self) -> dict[int, float]:
        nz = np.flatnonzero(self.scores)
        return dict(zip(nz.tolist(), self.scores[nz].tolist()))

    def __getitem__(self, v: int) -> float:
        return float(self.scores[v])


def walk_weight(k: int, alpha: float) -> float:
    """Decay factor ``(1 - alpha) ** k`` applied to walks of length ``k``."""
    if k < 0:
        raise ValueError("walk length must be non-negative")
    return (1.0 - alpha) ** k


def exact_ppr(view: UndirectedView, source: int, cfg: PprConfig = PprConfig()) -> PprVector:
    """Power iteration on ``p = alpha*x_s + (1-alpha) * A D^-1 p``.

    Mass sitting on a degree-0 node teleports back to ``source``.
    """
    n = view.n
    if not 0 <= source < n:
        raise IndexError(source)
    adj = view.to_scipy()
    deg = view.degree
    inv_deg = np.zeros(n)
    nz = deg > 0
    inv_deg[nz] = 1.0 / deg[nz]
    dangling = ~nz
    alpha = cfg.alpha

    p = np.zeros(n)
    p[source] = 1.0
    for _ in range(cfg.max_iter_exact):
        walk = adj @ (p * inv_deg)
        walk[source] += p[dangling].sum()
        nxt = (1.0 - alpha) * walk
        nxt[source] += alpha
        diff = np.abs(nxt - p).sum()
        p = nxt
        if diff < cfg.oracle_tol:
            return PprVector(source, p / p.sum(), 0.0)
    raise ConvergenceError(f"exact PPR from {source} did not converge in {cfg.max_iter_exact} iterations")


@njit(cache=True)
def _push_kernel(indptr, indices, weights, degree, source, alpha, eps):
    n = degree.shape[0]
    p = np.zeros(n)
    r = np.zeros(n)
    if degree[source] == 0.0:
        p[source] = 1.0
        return p, r, 0
    # circular FIFO of nodes whose residual reached eps * degree
    queued = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n + 1, dtype=np.int64)
    head, tail = 0, 1
    queue[0] = source
    queued[source] = True
    r[source] = 1.0
    pushes = 0
    while head != tail:
        u = queue[head]
        head += 1
        if head == n + 1:
            head = 0
        queued[u] = False
        ru = r[u]
        r[u] = 0.0
        p[u] += alpha * ru
        share = (1.0 - alpha) * ru / degree[u]
        pushes += 1
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            r[v] += share * weights[j]
            if not queued[v] and r[v] >= eps * degree[v]:
                queued[v] = True
                queue[tail] = v
                tail += 1
                if tail == n + 1:
                    tail = 0
    return p, r, pushes


def approx_ppr(view: UndirectedView, source: int, cfg: PprConfig = PprConfig()) -> PprVector:
    """Local push approximation.

    On return every residual satisfies ``r(v) < epsilon * degree(v)``, so
    ``0 <= exact(v) - approx(v) <= epsilon * degree(v)`` at every node.
    """
    if not 0 <= source < view.n:
        raise IndexError(source)
    p, r, pushes = _push_kernel(
        view.indptr, view.indices, view.fweights, view.degree,
        int(source), float(cfg.alpha), float(cfg.epsilon),
    )
    return PprVector(int(source), p, float(r.sum()), int(pushes))
