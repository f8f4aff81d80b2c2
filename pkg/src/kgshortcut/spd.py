"""Shortest-path diagnostics of test queries and the combined shortcut audit."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .datasets import DatasetBundle, InferenceGraph, new_relation_fraction
from .errors import DegenerateReport, UndefinedCorrelation
from .graph import UndirectedView, undirected_view
from .ppr import PprConfig, approx_ppr
from .ranking import FilterIndex, Heuristic, _group_by, evaluate_dataset, query_arrays

UNREACHABLE = -1
DEFAULT_BUCKETS = (1, 2, 3, 4)


@njit(cache=True)
def _bfs_kernel(indptr, indices, source):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            if dist[v] < 0:
                dist[v] = du
                queue[tail] = v
                tail += 1
    return dist


def bfs_distances(view: UndirectedView, source: int) -> np.ndarray:
    """Hop distances from ``source``; :data:`UNREACHABLE` (-1) where disconnected."""
    if not 0 <= source < view.n:
        raise IndexError(source)
    return _bfs_kernel(view.indptr, view.indices, int(source))


@dataclass
class SpdReport:
    mean_spd_positive: float
    mean_spd_negative: float
    delta_spd: float
    unreachable_positive_fraction: float
    unreachable_negative_fraction: float
    per_graph: list[dict] = field(default_factory=list)
    mode: str = "micro"
    cap: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Tally:
    pos_sum: float = 0.0
    pos_n: int = 0
    pos_unreach: int = 0
    neg_sum: float = 0.0
    neg_n: int = 0
    neg_unreach: int = 0
    macro_sum: float = 0.0
    macro_n: int = 0
    self_queries: int = 0


def _spd_tally(inf: InferenceGraph, view: UndirectedView, cap: int | None) -> _Tally:
    filt = FilterIndex.for_inference(inf)
    known, relation, direction, answer = query_arrays(inf.test)
    n = view.n
    tally = _Tally()
    for source, idx in _group_by(known).items():
        d = bfs_distances(view, source)
        if cap is not None:
            d = np.where(d < 0, cap, d)
        reach = d >= 0
        # the known entity itself is not a distance pair
        base_sum = float(d[reach].sum())
        base_n = int(reach.sum()) - 1
        base_unreach = n - int(reach.sum())
        for q in idx.tolist():
            ans = int(answer[q])
            if ans == source:
                tally.self_queries += 1
                continue
            if d[ans] >= 0:
                tally.pos_sum += d[ans]
                tally.pos_n += 1
            else:
                tally.pos_unreach += 1
            f = filt.get(source, relation[q], direction[q])
            f = f[f != source]
            fd = d[f]
            fr = fd >= 0
            s = base_sum - float(fd[fr].sum())
            c = base_n - int(fr.sum())
            tally.neg_sum += s
            tally.neg_n += c
            tally.neg_unreach += base_unreach - int((~fr).sum())
            if c > 0:
                tally.macro_sum += s / c
                tally.macro_n += 1
    return tally


def spd_report(bundle: DatasetBundle, *, macro: bool = False, cap: int | None = None) -> SpdReport:
    """Mean SPD of positive vs. negative (query, candidate) pairs.

    Distances are measured on each inference graph without its test
    triples. Unreachable pairs are left out of the means and reported as
    fractions, unless ``cap`` assigns them a fixed distance. Bundle-level
    values are unweighted means over inference graphs.
    """
    per_graph = []
    for i, inf in enumerate(bundle.inference, start=1):
        view = undirected_view(inf.graph, unit_weights=True)
        t = _spd_tally(inf, view, cap)
        if t.pos_n == 0:
            raise DegenerateReport(f"inference graph {i}: every positive pair is unreachable")
        pos = t.pos_sum / t.pos_n
        if macro:
            neg = t.macro_sum / t.macro_n if t.macro_n else math.nan
        else:
            neg = t.neg_sum / t.neg_n if t.neg_n else math.nan
        pos_total = t.pos_n + t.pos_unreach
        neg_total = t.neg_n + t.neg_unreach
        per_graph.append({
            "graph": inf.name or f"inference_{i}",
            "mean_spd_positive": pos,
            "mean_spd_negative": neg,
            "delta_spd": neg - pos,
            "unreachable_positive_fraction": t.pos_unreach / pos_total if pos_total else 0.0,
            "unreachable_negative_fraction": t.neg_unreach / neg_total if neg_total else 0.0,
            "positive_pairs": pos_total,
            "negative_pairs": neg_total,
            "self_queries_skipped": t.self_queries,
        })
    mean = lambda k: float(np.mean([g[k] for g in per_graph]))  # noqa: E731
    pos, neg = mean("mean_spd_positive"), mean("mean_spd_negative")
    return SpdReport(pos, neg, neg - pos, mean("unreachable_positive_fraction"),
                     mean("unreachable_negative_fraction"), per_graph, "macro" if macro else "micro", cap)


def delta_spd(inf: InferenceGraph, cap: int | None = None) -> float:
    view = undirected_view(inf.graph, unit_weights=True)
    t = _spd_tally(inf, view, cap)
    if t.pos_n == 0 or t.neg_n == 0:
        raise DegenerateReport("no reachable positive or negative pairs")
    return t.neg_sum / t.neg_n - t.pos_sum / t.pos_n


@dataclass
class BucketTable:
    bounds: list[float]
    rows: list[dict]

    def to_dict(self) -> dict:
        return asdict(self)

    def percent_increase(self) -> list[float | None]:
        return [r["percent_increase"] for r in self.rows]


def _bucket_label(lo, hi) -> str:
    return f"[{lo:g}, {'inf' if math.isinf(hi) else f'{hi:g}'})"


def ppr_by_spd_bucket(bundle: DatasetBundle, cfg: PprConfig = PprConfig(),
                      buckets: Sequence[float] = DEFAULT_BUCKETS, upper: float = math.inf) -> BucketTable:
    """Mean PPR of positive vs. negative candidates, grouped by SPD interval.

    ``buckets`` are the left edges of consecutive half-open intervals; the
    last interval ends at ``upper``. Unreachable pairs count toward the top
    interval only when it is unbounded.
    """
    edges = np.asarray(list(buckets) + [upper], dtype=np.float64)
    nb = len(edges) - 1
    pos_sum, pos_n = np.zeros(nb), np.zeros(nb, dtype=np.int64)
    neg_sum, neg_n = np.zeros(nb), np.zeros(nb, dtype=np.int64)

    for inf in bundle.inference:
        view = undirected_view(inf.graph, unit_weights=cfg.unit_weights)
        hop_view = view if cfg.unit_weights else undirected_view(inf.graph, unit_weights=True)
        filt = FilterIndex.for_inference(inf)
        known, relation, direction, answer = query_arrays(inf.test)
        for source, idx in _group_by(known).items():
            d = bfs_distances(hop_view, source).astype(np.float64)
            d[d < 0] = math.inf
            b = np.searchsorted(edges, d, side="right") - 1
            b[(d < edges[0]) | (d >= edges[-1])] = -1
            if math.isinf(upper):
                b[np.isinf(d)] = nb - 1
            b[source] = -1
            scores = approx_ppr(view, source, cfg).scores
            ok = b >= 0
            base_sum = np.bincount(b[ok], weights=scores[ok], minlength=nb)
            base_n = np.bincount(b[ok], minlength=nb)
            for q in idx.tolist():
                ans = int(answer[q])
                f = filt.get(source, relation[q], direction[q])
                fb = b[f]
                keep = fb >= 0
                neg_sum += base_sum - np.bincount(fb[keep], weights=scores[f][keep], minlength=nb)
                neg_n += base_n - np.bincount(fb[keep], minlength=nb)
                if b[ans] >= 0:
                    pos_sum[b[ans]] += scores[ans]
                    pos_n[b[ans]] += 1

    rows = []
    for i in range(nb):
        pos = pos_sum[i] / pos_n[i] if pos_n[i] else None
        neg = neg_sum[i] / neg_n[i] if neg_n[i] else None
        pct = (pos - neg) / neg * 100.0 if pos is not None and neg else None
        rows.append({
            "bucket": _bucket_label(edges[i], edges[i + 1]),
            "mean_ppr_positive": pos,
            "mean_ppr_negative": neg,
            "percent_increase": pct,
            "positive_pairs": int(pos_n[i]),
            "negative_pairs": int(neg_n[i]),
            "empty": bool(pos_n[i] == 0 or neg_n[i] == 0),
        })
    return BucketTable([float(e) for e in edges], rows)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation of two equal-length samples."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two 1-d samples of equal length >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class AuditReport:
    dataset: str
    ppr_hits_at_10: list[float]
    mean_ppr_hits_at_10: float
    spd: SpdReport
    new_relation_fraction: list[float]
    parent_comparison: dict | None = None
    ranking: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> dict:
        return {"dataset": self.dataset, "delta_spd": self.spd.delta_spd, "ppr_hits10": self.mean_ppr_hits_at_10}


def percent_increase(value: float, parent: float) -> float:
    return (value - parent) / parent * 100.0


def audit_dataset(bundle: DatasetBundle, cfg: PprConfig = PprConfig(), parent: DatasetBundle | None = None,
                  *, cap: int | None = None, macro: bool = False) -> AuditReport:
    """PPR Hits@10, SPD statistics and new-relation share, optionally vs. a parent."""
    ranking = evaluate_dataset(bundle, Heuristic.PPR, cfg)
    hits = [100.0 * h for h in ranking.hits_at_10()]
    mean_hits = float(np.mean(hits))
    spd = spd_report(bundle, macro=macro, cap=cap)
    if bundle.task.value == "trans":
        new_rel = [0.0]
    else:
        new_rel = [new_relation_fraction(bundle.train, inf.graph) for inf in bundle.inference]
    comparison = None
    if parent is not None:
        parent_hits = 100.0 * float(np.mean(evaluate_dataset(parent, Heuristic.PPR, cfg).hits_at_10()))
        comparison = {
            "parent": parent.name,
            "parent_ppr_hits_at_10": parent_hits,
            "percent_increase": percent_increase(mean_hits, parent_hits),
        }
    return AuditReport(bundle.name, hits, mean_hits, spd, new_rel, comparison, ranking.to_dict())


def audit_csv(reports: Sequence[AuditReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["dataset", "delta_spd", "ppr_hits10"], lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.csv_row())
    return buf.getvalue()
