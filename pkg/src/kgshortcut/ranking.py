"""Filtered ranking of relation-free heuristics (PPR, tail degree)."""
from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .datasets import DatasetBundle, InferenceGraph
from .errors import EmptyEvaluation, InvalidQuery
from .graph import KnowledgeGraph, UndirectedView, undirected_view
from .ppr import PprConfig, approx_ppr

HITS_AT = (1, 3, 10)


class Direction(enum.IntEnum):
    PREDICT_TAIL = 0
    PREDICT_HEAD = 1


class Heuristic(str, enum.Enum):
    PPR = "ppr"
    TAIL_DEGREE = "degree"


@dataclass(frozen=True)
class Query:
    known: int
    relation: int
    direction: Direction
    answer: int

    @classmethod
    def from_triple(cls, triple, direction: Direction) -> "Query":
        h, r, t = (int(x) for x in triple)
        if direction is Direction.PREDICT_TAIL:
            return cls(h, r, direction, t)
        return cls(t, r, direction, h)


def query_arrays(test: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(known, relation, direction, answer) for both queries of every test triple.

    Query ``2i`` predicts the tail of triple ``i`` and ``2i + 1`` its head.
    """
    test = np.asarray(test, dtype=np.int64).reshape(-1, 3)
    m = len(test)
    known = np.empty(2 * m, dtype=np.int64)
    answer = np.empty(2 * m, dtype=np.int64)
    known[0::2], answer[0::2] = test[:, 0], test[:, 2]
    known[1::2], answer[1::2] = test[:, 2], test[:, 0]
    relation = np.repeat(test[:, 1], 2)
    direction = np.tile(np.array([Direction.PREDICT_TAIL, Direction.PREDICT_HEAD], dtype=np.int64), m)
    return known, relation, direction, answer


class FilterIndex:
    """Known true answers per (entity, relation, direction)."""

    def __init__(self, *triple_sets: np.ndarray):
        answers: dict[tuple[int, int, int], set[int]] = defaultdict(set)
        for trip in triple_sets:
            for h, r, t in np.asarray(trip, dtype=np.int64).reshape(-1, 3).tolist():
                answers[(h, r, int(Direction.PREDICT_TAIL))].add(t)
                answers[(t, r, int(Direction.PREDICT_HEAD))].add(h)
        self._answers = {k: np.fromiter(sorted(v), dtype=np.int64, count=len(v)) for k, v in answers.items()}

    @classmethod
    def for_inference(cls, inf: InferenceGraph) -> "FilterIndex":
        return cls(inf.graph.triples, inf.test, inf.filter_extra)

    def get(self, known: int, relation: int, direction: int) -> np.ndarray:
        return self._answers.get((int(known), int(relation), int(direction)), np.zeros(0, dtype=np.int64))

    def __contains__(self, key) -> bool:
        return tuple(int(k) for k in key) in self._answers


def score_candidates(graph: KnowledgeGraph, query: Query, heuristic: Heuristic | str,
                     cfg: PprConfig = PprConfig(), view: UndirectedView | None = None) -> np.ndarray:
    """Dense score vector over ``graph``'s entities for one query."""
    heuristic = Heuristic(heuristic)
    if view is None:
        view = undirected_view(graph, unit_weights=cfg.unit_weights)
    if heuristic is Heuristic.TAIL_DEGREE:
        return view.degree.copy()
    return approx_ppr(view, query.known, cfg).scores


def tie_counts(scores: np.ndarray, answer: int, filtered=()) -> tuple[int, int]:
    """(candidates scoring strictly higher, other candidates tied) for ``answer``."""
    scores = np.asarray(scores)
    if not 0 <= answer < len(scores):
        raise InvalidQuery(f"answer {answer} outside the entity universe of size {len(scores)}")
    sa = scores[answer]
    greater = int(np.count_nonzero(scores > sa))
    ties = int(np.count_nonzero(scores == sa)) - 1
    f = np.unique(np.asarray(list(filtered) if not isinstance(filtered, np.ndarray) else filtered, dtype=np.int64))
    f = f[f != answer]
    if len(f):
        fs = scores[f]
        greater -= int(np.count_nonzero(fs > sa))
        ties -= int(np.count_nonzero(fs == sa))
    return greater, ties


def rank_with_ties(scores: np.ndarray, answer: int, filtered=()) -> float:
    """Expected rank of ``answer`` under uniformly random tie-breaking."""
    greater, ties = tie_counts(scores, answer, filtered)
    return 1.0 + greater + ties / 2.0


def hits_credit(greater, ties, k: int):
    """Probability that a random tie-break places the answer within the top ``k``."""
    greater = np.asarray(greater, dtype=np.float64)
    ties = np.asarray(ties, dtype=np.float64)
    return np.clip(k - greater, 0.0, ties + 1.0) / (ties + 1.0)


def _group_by(keys: np.ndarray) -> dict[int, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    uniq, starts = np.unique(keys[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    return {int(u): order[s:e] for u, s, e in zip(uniq, starts, bounds)}


def rank_inference_graph(inf: InferenceGraph, heuristic: Heuristic | str, cfg: PprConfig = PprConfig(),
                         view: UndirectedView | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Tie counts (greater, ties) for every query of ``inf`` in query order."""
    heuristic = Heuristic(heuristic)
    graph = inf.graph
    if view is None:
        view = undirected_view(graph, unit_weights=cfg.unit_weights)
    filt = FilterIndex.for_inference(inf)
    known, relation, direction, answer = query_arrays(inf.test)
    n = graph.num_entities
    if len(answer) and (answer.max() >= n or known.max() >= n):
        raise InvalidQuery("test triple references an entity outside the inference graph")
    greater = np.zeros(len(known), dtype=np.int64)
    ties = np.zeros(len(known), dtype=np.int64)

    def fill(scores: np.ndarray, idx: np.ndarray):
        ordered = np.sort(scores)
        sa = scores[answer[idx]]
        lo = np.searchsorted(ordered, sa, side="left")
        hi = np.searchsorted(ordered, sa, side="right")
        greater[idx] = n - hi
        ties[idx] = hi - lo - 1
        for q in idx.tolist():
            f = filt.get(known[q], relation[q], direction[q])
            f = f[f != answer[q]]
            if len(f):
                fs = scores[f]
                s = scores[answer[q]]
                greater[q] -= np.count_nonzero(fs > s)
                ties[q] -= np.count_nonzero(fs == s)

    if heuristic is Heuristic.TAIL_DEGREE:
        fill(view.degree, np.arange(len(known)))
    else:
        for source, idx in _group_by(known).items():
            fill(approx_ppr(view, source, cfg).scores, idx)
    return greater, ties


def metrics_from_ties(greater: np.ndarray, ties: np.ndarray) -> dict:
    if len(greater) == 0:
        raise EmptyEvaluation("no queries to evaluate")
    rank = 1.0 + greater + ties / 2.0
    out = {"mrr": float(np.mean(1.0 / rank)), "queries": int(len(greater))}
    for k in HITS_AT:
        out[f"hits_at_{k}"] = float(np.mean(hits_credit(greater, ties, k)))
    return out


@dataclass
class RankingReport:
    heuristic: str
    per_graph: list[dict]
    aggregate: dict
    config: dict = field(default_factory=dict)

    def hits_at_10(self) -> list[float]:
        return [g["hits_at_10"] for g in self.per_graph]

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_dataset(bundle: DatasetBundle, heuristic: Heuristic | str = Heuristic.PPR,
                     cfg: PprConfig = PprConfig()) -> RankingReport:
    """Rank both queries of every test triple on each inference graph.

    Metrics are means over a graph's queries; the aggregate is the
    unweighted mean over inference graphs.
    """
    heuristic = Heuristic(heuristic)
    per_graph = []
    for i, inf in enumerate(bundle.inference, start=1):
        if len(inf.test) == 0:
            raise EmptyEvaluation(f"inference graph {i} of {bundle.name} has no test triples")
        greater, ties = rank_inference_graph(inf, heuristic, cfg)
        row = {"graph": inf.name or f"inference_{i}"}
        row.update(metrics_from_ties(greater, ties))
        per_graph.append(row)
    keys = ["mrr"] + [f"hits_at_{k}" for k in HITS_AT]
    aggregate = {k: float(np.mean([g[k] for g in per_graph])) for k in keys}
    aggregate["queries"] = int(sum(g["queries"] for g in per_graph))
    config = {"alpha": cfg.alpha, "epsilon": cfg.epsilon, "unit_weights": cfg.unit_weights,
              "tie_policy": "expected-rank"}
    return RankingReport(heuristic.value, per_graph, aggregate, config)
