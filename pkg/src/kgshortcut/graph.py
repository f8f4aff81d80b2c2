"""Interned knowledge graphs and their relation-free undirected views."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import EmptyGraph


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Vocab:
    """Bidirectional label <-> dense id mapping, ids by first appearance."""

    __slots__ = ("labels", "_index")

    def __init__(self, labels: Iterable[str] = ()):
        self.labels: list[str] = []
        self._index: dict[str, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label: str) -> int:
        idx = self._index.get(label)
        if idx is None:
            idx = len(self.labels)
            self._index[label] = idx
            self.labels.append(label)
        return idx

    def id(self, label: str) -> int:
        return self._index[label]

    def get(self, label: str, default=None):
        return self._index.get(label, default)

    def label(self, idx: int) -> str:
        return self.labels[idx]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.labels == other.labels

    def __repr__(self) -> str:
        return f"Vocab({len(self)})"


def _csr(keys: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR index from ``keys[i]`` (row of item i) to item positions."""
    order = np.argsort(keys, kind="stable")
    counts = np.bincount(keys, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, order.astype(np.int64)


@dataclass(eq=False)
class KnowledgeGraph:
    """Deduplicated directed multigraph of (head, relation, tail) id triples.

    Immutable by convention once built; all derived graphs are new objects.
    """

    entities: Vocab
    relations: Vocab
    triples: np.ndarray  # (m, 3) int64: head, relation, tail
    out_ptr: np.ndarray = field(init=False, repr=False)
    out_idx: np.ndarray = field(init=False, repr=False)
    in_ptr: np.ndarray = field(init=False, repr=False)
    in_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.triples = np.ascontiguousarray(self.triples, dtype=np.int64).reshape(-1, 3)
        self.triples.setflags(write=False)
        n = len(self.entities)
        self.out_ptr, self.out_idx = _csr(self.triples[:, 0], n)
        self.in_ptr, self.in_idx = _csr(self.triples[:, 2], n)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def __len__(self) -> int:
        return len(self.triples)

    def out_triples(self, entity: int) -> np.ndarray:
        return self.triples[self.out_idx[self.out_ptr[entity]:self.out_ptr[entity + 1]]]

    def in_triples(self, entity: int) -> np.ndarray:
        return self.triples[self.in_idx[self.in_ptr[entity]:self.in_ptr[entity + 1]]]

    def labeled(self, triples: np.ndarray | None = None) -> list[tuple[str, str, str]]:
        rows = self.triples if triples is None else triples
        ent, rel = self.entities.labels, self.relations.labels
        return [(ent[h], rel[r], ent[t]) for h, r, t in rows.tolist()]

    def relation_labels_used(self) -> set[str]:
        rels = np.unique(self.triples[:, 1])
        return {self.relations.labels[r] for r in rels.tolist()}

    def encode(self, labeled: Iterable[tuple[str, str, str]]) -> np.ndarray:
        """Map labeled triples into this graph's id space (KeyError if unknown)."""
        e, r = self.entities, self.relations
        out = [(e.id(h), r.id(rel), e.id(t)) for h, rel, t in labeled]
        return np.array(out, dtype=np.int64).reshape(-1, 3)

    def triple_set(self) -> set[tuple[int, int, int]]:
        return set(map(tuple, self.triples.tolist()))

    def subgraph(self, mask: np.ndarray, extra: Sequence[tuple[str, str, str]] = ()) -> "KnowledgeGraph":
        """Graph over the masked triples, re-interned from scratch.

        ``extra`` labeled triples only contribute vocabulary (appended after
        the triples' own labels), which is how held-out test triples keep
        their ids resolvable.
        """
        kept = self.triples[np.asarray(mask, dtype=bool)]
        return build_graph(self.labeled(kept), vocab_from=extra, allow_empty=True)

    def induced(self, entity_mask: np.ndarray) -> "KnowledgeGraph":
        entity_mask = np.asarray(entity_mask, dtype=bool)
        keep = entity_mask[self.triples[:, 0]] & entity_mask[self.triples[:, 2]]
        return self.subgraph(keep)


def build_graph(
    triples: Iterable[tuple[str, str, str]],
    *,
    vocab_from: Iterable[tuple[str, str, str]] = (),
    allow_empty: bool = False,
) -> KnowledgeGraph:
    """Intern labeled triples into a :class:`KnowledgeGraph`.

    Ids follow first appearance; exact duplicate triples are dropped.
    ``vocab_from`` triples add labels (entities and relations) after the
    graph's own, without adding triples.
    """
    entities, relations = Vocab(), Vocab()
    seen: set[tuple[int, int, int]] = set()
    rows = []
    for h, r, t in triples:
        key = (entities.add(h), relations.add(r), entities.add(t))
        if key not in seen:
            seen.add(key)
            rows.append(key)
    if not rows and not allow_empty:
        raise EmptyGraph("cannot build a graph from zero triples")
    for h, r, t in vocab_from:
        entities.add(h)
        relations.add(r)
        entities.add(t)
    return KnowledgeGraph(entities, relations, np.array(rows, dtype=np.int64).reshape(-1, 3))


@dataclass(eq=False)
class UndirectedView:
    """Symmetric weighted adjacency over entity ids, relations dropped."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    degree: np.ndarray

    def __post_init__(self):
        self.fweights = self.weights.astype(np.float64)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum()) / 2.0

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def neighbor_weights(self, u: int) -> np.ndarray:
        return self.weights[self.indptr[u]:self.indptr[u + 1]]

    def edge_weight(self, u: int, v: int) -> int:
        nb = self.neighbors(u)
        pos = np.searchsorted(nb, v)
        if pos < len(nb) and nb[pos] == v:
            return int(self.neighbor_weights(u)[pos])
        return 0

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights.astype(np.float64), self.indices, self.indptr), shape=(self.n, self.n))


def view_from_edges(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> UndirectedView:
    """Symmetric CSR from undirected edge lists (each pair once, u != v)."""
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([w, w]).astype(np.int64)
    mat = sp.csr_matrix((data, (rows, cols)), shape=(n, n), dtype=np.int64)
    mat.sum_duplicates()
    mat.sort_indices()
    degree = np.asarray(mat.sum(axis=1)).ravel().astype(np.float64)
    return UndirectedView(
        n=n,
        indptr=mat.indptr.astype(np.int64),
        indices=mat.indices.astype(np.int64),
        weights=mat.data.astype(np.int64),
        degree=degree,
    )


def undirected_view(
    graph: KnowledgeGraph,
    triple_mask: np.ndarray | None = None,
    *,
    unit_weights: bool = False,
) -> UndirectedView:
    """Collapse ``graph`` (or a masked subset of its triples) to an undirected view.

    Each unordered entity pair becomes one edge whose weight is the number of
    distinct triples joining it, or 1 when ``unit_weights``. Self-loop triples
    add nothing. The view keeps the full entity id space of ``graph``.
    """
    trip = graph.triples if triple_mask is None else graph.triples[np.asarray(triple_mask, dtype=bool)]
    h, t = trip[:, 0], trip[:, 2]
    keep = h != t
    lo = np.minimum(h[keep], t[keep])
    hi = np.maximum(h[keep], t[keep])
    n = graph.num_entities
    keys, counts = np.unique(lo * n + hi, return_counts=True)
    if unit_weights:
        counts = np.ones_like(counts)
    return view_from_edges(n, keys // n, keys % n, counts)
