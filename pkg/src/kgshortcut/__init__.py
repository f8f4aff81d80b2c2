"""Audit knowledge-graph completion datasets for the PPR shortcut and build
partition-based inductive splits that avoid it."""
from .datasets import DatasetBundle, InferenceGraph, Task, emit_dataset, load_dataset, parse_triples
from .graph import KnowledgeGraph, Triple, UndirectedView, build_graph, undirected_view
from .ppr import PprConfig, approx_ppr, exact_ppr, walk_weight
from .ranking import Heuristic, evaluate_dataset, rank_with_ties
from .spd import audit_dataset, bfs_distances, pearson, ppr_by_spd_bucket, spd_report

__version__ = "0.1.0"

__all__ = [
    "DatasetBundle", "InferenceGraph", "Task", "emit_dataset", "load_dataset", "parse_triples",
    "KnowledgeGraph", "Triple", "UndirectedView", "build_graph", "undirected_view",
    "PprConfig", "approx_ppr", "exact_ppr", "walk_weight",
    "Heuristic", "evaluate_dataset", "rank_with_ties",
    "audit_dataset", "bfs_distances", "pearson", "ppr_by_spd_bucket", "spd_report",
]
