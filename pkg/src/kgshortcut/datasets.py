"""Triple files, dataset bundles, and their on-disk layouts.

Native layout written by :func:`emit_dataset`::

    train.txt  valid.txt  stats.json
    inference_1/graph.txt  inference_1/test.txt
    inference_2/...

:func:`load_dataset` additionally understands the transductive layout
(train/valid/test.txt) and the legacy inductive layouts published with
GraIL (``X`` + sibling ``X_ind``), ILPC (``inference*.txt``) and InGram
(``msg.txt``).
"""
from __future__ import annotations

import enum
import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import DatasetIOError, ParseError, ValidationError
from .graph import KnowledgeGraph, build_graph

log = logging.getLogger(__name__)

Labeled = tuple[str, str, str]


class Task(str, enum.Enum):
    E = "e"
    ER = "er"
    TRANSDUCTIVE = "trans"

    @classmethod
    def parse(cls, value: "str | Task") -> "Task":
        if isinstance(value, Task):
            return value
        value = value.lower()
        aliases = {"e": cls.E, "er": cls.ER, "e,r": cls.ER, "trans": cls.TRANSDUCTIVE, "transductive": cls.TRANSDUCTIVE}
        try:
            return aliases[value]
        except KeyError:
            raise ValueError(f"unknown task {value!r}") from None


def parse_triples(stream: IO | bytes | str, *, source: str | None = None) -> list[Labeled]:
    """Read ``head<TAB>relation<TAB>tail`` lines. Blank lines are skipped."""
    if isinstance(stream, (bytes, bytearray)):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        data = stream.read()
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 3 tab-separated fields, got {len(parts)}", source)
        h, r, t = (p.strip() for p in parts)
        out.append((h, r, t))
    return out


def read_triples(path: str | os.PathLike) -> list[Labeled]:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return parse_triples(fh, source=str(path))
    except FileNotFoundError:
        raise DatasetIOError(f"missing triple file: {path}") from None
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc


def format_triples(triples: Iterable[Labeled]) -> str:
    return "".join(f"{h}\t{r}\t{t}\n" for h, r, t in triples)


def write_triples(path: str | os.PathLike, triples: Iterable[Labeled]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_triples(triples))


@dataclass(eq=False)
class InferenceGraph:
    """An observed graph plus the test triples held out of it.

    ``filter_extra`` holds further known-true triples that must be filtered
    at ranking time but are not part of the observed graph (validation
    triples of legacy datasets, or train+valid in the transductive task).
    """

    graph: KnowledgeGraph
    test: np.ndarray
    filter_extra: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))
    name: str = ""

    def __post_init__(self):
        self.test = np.asarray(self.test, dtype=np.int64).reshape(-1, 3)
        self.filter_extra = np.asarray(self.filter_extra, dtype=np.int64).reshape(-1, 3)


@dataclass(eq=False)
class DatasetBundle:
    name: str
    task: Task
    train: KnowledgeGraph
    valid: np.ndarray
    inference: list[InferenceGraph]
    generator: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.task = Task.parse(self.task)
        self.valid = np.asarray(self.valid, dtype=np.int64).reshape(-1, 3)


def graph_with_holdout(graph_triples: list[Labeled], held_out: list[Labeled]) -> tuple[KnowledgeGraph, np.ndarray]:
    """Build a graph whose vocabulary also covers ``held_out``; encode those."""
    g = build_graph(graph_triples, vocab_from=held_out, allow_empty=True)
    return g, g.encode(held_out)


def new_relation_fraction(train: KnowledgeGraph, graph: KnowledgeGraph) -> float:
    """Fraction of the graph's relations that the train graph never uses."""
    rels = graph.relation_labels_used()
    if not rels:
        return 0.0
    known = train.relation_labels_used()
    return len(rels - known) / len(rels)


def new_relation_triple_fraction(train: KnowledgeGraph, graph: KnowledgeGraph) -> float:
    if len(graph) == 0:
        return 0.0
    known = train.relation_labels_used()
    rel = graph.relations.labels
    new = sum(1 for r in graph.triples[:, 1].tolist() if rel[r] not in known)
    return new / len(graph)


def _rows(arr: np.ndarray) -> set[tuple[int, int, int]]:
    return set(map(tuple, arr.tolist()))


def validate_bundle(bundle: DatasetBundle) -> list[str]:
    """Return a list of violated bundle invariants (empty when valid)."""
    problems = []
    train = bundle.train
    if _rows(bundle.valid) & train.triple_set():
        problems.append("validation triples overlap the train graph")
    train_rels = train.relation_labels_used()
    train_ents = set(train.entities.labels)
    if bundle.task is Task.TRANSDUCTIVE:
        if len(bundle.inference) != 1 or bundle.inference[0].graph is not train:
            problems.append("transductive bundle must have exactly one inference graph sharing the train graph")
    for i, inf in enumerate(bundle.inference, start=1):
        if _rows(inf.test) & inf.graph.triple_set():
            problems.append(f"inference graph {i}: test triples overlap the graph")
        if bundle.task is Task.TRANSDUCTIVE:
            continue
        if bundle.task is Task.E:
            unseen = inf.graph.relation_labels_used() - train_rels
            if unseen:
                problems.append(f"inference graph {i}: task E but {len(unseen)} relation(s) unseen in train")
        shared = train_ents.intersection(inf.graph.entities.labels)
        if shared:
            problems.append(f"inference graph {i}: {len(shared)} entities shared with the train graph")
    return problems


def check_bundle(bundle: DatasetBundle, strict: bool = True) -> list[str]:
    problems = validate_bundle(bundle)
    if problems and strict:
        raise ValidationError(problems)
    for p in problems:
        log.warning("%s: %s", bundle.name, p)
    return problems


def bundle_stats(bundle: DatasetBundle, delta_spd: dict | None = None, selection: dict | None = None) -> dict:
    graphs = [{
        "name": "train",
        "entities": bundle.train.num_entities,
        "relations": len(bundle.train.relation_labels_used()),
        "triples": len(bundle.train),
        "split_size": len(bundle.valid),
        "new_relation_fraction": None,
    }]
    for i, inf in enumerate(bundle.inference, start=1):
        graphs.append({
            "name": inf.name or f"inference_{i}",
            "entities": inf.graph.num_entities,
            "relations": len(inf.graph.relation_labels_used()),
            "triples": len(inf.graph),
            "split_size": len(inf.test),
            "new_relation_fraction": new_relation_fraction(bundle.train, inf.graph),
        })
    stats = {
        "name": bundle.name,
        "task": bundle.task.value,
        "graphs": graphs,
        "delta_spd": delta_spd or {},
        "generator": bundle.generator,
        "warnings": list(bundle.warnings),
    }
    if selection is not None:
        stats["selection"] = selection
    return stats


def emit_dataset(bundle: DatasetBundle, directory: str | os.PathLike, *,
                 delta_spd: dict | None = None, selection: dict | None = None) -> Path:
    """Write ``bundle`` in the native layout and return the directory."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_triples(out / "train.txt", bundle.train.labeled())
        write_triples(out / "valid.txt", bundle.train.labeled(bundle.valid))
        if bundle.task is Task.TRANSDUCTIVE:
            inf = bundle.inference[0]
            write_triples(out / "test.txt", bundle.train.labeled(inf.test))
        else:
            for i, inf in enumerate(bundle.inference, start=1):
                sub = out / f"inference_{i}"
                sub.mkdir(exist_ok=True)
                write_triples(sub / "graph.txt", inf.graph.labeled())
                write_triples(sub / "test.txt", inf.graph.labeled(inf.test))
                if len(inf.filter_extra):
                    write_triples(sub / "filter.txt", inf.graph.labeled(inf.filter_extra))
        stats = bundle_stats(bundle, delta_spd, selection)
        with open(out / "stats.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(stats, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise DatasetIOError(f"cannot write dataset to {out}: {exc}") from exc
    return out


def _inference_dirs(root: Path) -> list[Path]:
    dirs = [p for p in root.iterdir() if p.is_dir() and p.name.startswith("inference_")]
    return sorted(dirs, key=lambda p: int(p.name.split("_", 1)[1]))


def _load_native(root: Path, task: Task | None) -> DatasetBundle:
    stats = {}
    if (root / "stats.json").exists():
        with open(root / "stats.json", encoding="utf-8") as fh:
            stats = json.load(fh)
    task = task or Task.parse(stats.get("task", "e"))
    train_l = read_triples(root / "train.txt")
    valid_l = read_triples(root / "valid.txt")
    if task is Task.TRANSDUCTIVE:
        return _transductive(root, stats.get("name", root.name), train_l, valid_l, read_triples(root / "test.txt"),
                             generator=stats.get("generator", {}), warnings=stats.get("warnings", []))
    train, valid = graph_with_holdout(train_l, valid_l)
    inference = []
    for sub in _inference_dirs(root):
        test_l = read_triples(sub / "test.txt")
        extra_l = read_triples(sub / "filter.txt") if (sub / "filter.txt").exists() else []
        g = build_graph(read_triples(sub / "graph.txt"), vocab_from=test_l + extra_l, allow_empty=True)
        inference.append(InferenceGraph(g, g.encode(test_l), g.encode(extra_l)))
    if not inference:
        raise DatasetIOError(f"{root}: no inference_<i>/ directories")
    return DatasetBundle(stats.get("name", root.name), task, train, valid, inference,
                         generator=stats.get("generator", {}), warnings=list(stats.get("warnings", [])))


def _transductive(root, name, train_l, valid_l, test_l, generator=None, warnings=()) -> DatasetBundle:
    train = build_graph(train_l, vocab_from=valid_l + test_l)
    valid = train.encode(valid_l)
    test = train.encode(test_l)
    inf = InferenceGraph(train, test, filter_extra=valid, name="transductive")
    return DatasetBundle(name, Task.TRANSDUCTIVE, train, valid, [inf], generator=dict(generator or {}),
                         warnings=list(warnings))


def _legacy(name, task, train_l, valid_l, inf_l, test_l, inf_valid_l=()) -> DatasetBundle:
    train, valid = graph_with_holdout(train_l, valid_l)
    inf_valid_l = list(inf_valid_l)
    g = build_graph(inf_l, vocab_from=test_l + inf_valid_l, allow_empty=True)
    inf = InferenceGraph(g, g.encode(test_l), g.encode(inf_valid_l), name="inference_1")
    warnings = []
    if inf_valid_l:
        warnings.append("validation_on_inference_graph")
    return DatasetBundle(name, task, train, valid, [inf], generator={"procedure": "legacy"}, warnings=warnings)


def detect_layout(root: Path) -> str:
    if (root / "stats.json").exists() or any(p.name.startswith("inference_") for p in root.iterdir() if p.is_dir()):
        return "native"
    if (root / "inference.txt").exists():
        return "ilpc"
    if (root / "msg.txt").exists():
        return "ingram"
    if (root.parent / f"{root.name}_ind").is_dir() or (root / "ind").is_dir():
        return "grail"
    return "transductive"


def load_dataset(directory: str | os.PathLike, task: "Task | str | None" = None, *, strict: bool = True) -> DatasetBundle:
    """Load any supported layout into a :class:`DatasetBundle` and validate it.

    With ``strict=False`` invariant violations are logged and recorded in
    ``bundle.warnings`` instead of raising, for auditing third-party data.
    """
    root = Path(directory)
    if not root.is_dir():
        raise DatasetIOError(f"not a dataset directory: {root}")
    task = Task.parse(task) if task is not None else None
    layout = detect_layout(root)
    name = root.name
    if layout == "native":
        bundle = _load_native(root, task)
    elif layout == "transductive":
        bundle = _transductive(root, name, read_triples(root / "train.txt"), read_triples(root / "valid.txt"),
                               read_triples(root / "test.txt"))
    elif layout == "grail":
        ind = root / "ind" if (root / "ind").is_dir() else root.parent / f"{root.name}_ind"
        ind_valid = read_triples(ind / "valid.txt") if (ind / "valid.txt").exists() else []
        bundle = _legacy(name, task or Task.E, read_triples(root / "train.txt"), read_triples(root / "valid.txt"),
                         read_triples(ind / "train.txt"), read_triples(ind / "test.txt"), ind_valid)
    elif layout == "ilpc":
        bundle = _legacy(name, task or Task.E, read_triples(root / "train.txt"), [],
                         read_triples(root / "inference.txt"), read_triples(root / "inference_test.txt"),
                         read_triples(root / "inference_validation.txt"))
    else:  # ingram
        bundle = _legacy(name, task or Task.ER, read_triples(root / "train.txt"), [],
                         read_triples(root / "msg.txt"), read_triples(root / "test.txt"),
                         read_triples(root / "valid.txt"))
    if task is not None and layout != "native" and bundle.task is not task:
        if task is Task.TRANSDUCTIVE or bundle.task is Task.TRANSDUCTIVE:
            raise ValidationError(f"{root}: layout {layout!r} cannot be read as task {task.value!r}")
        bundle.task = task
    problems = check_bundle(bundle, strict=strict)
    bundle.warnings.extend(p for p in problems if p not in bundle.warnings)
    return bundle


def bundles_equal(a: DatasetBundle, b: DatasetBundle) -> bool:
    """Structural identity: names, task, vocabularies, triples and splits."""
    def same_graph(x: KnowledgeGraph, y: KnowledgeGraph) -> bool:
        return x.entities == y.entities and x.relations == y.relations and np.array_equal(x.triples, y.triples)

    if (a.name, a.task, len(a.inference)) != (b.name, b.task, len(b.inference)):
        return False
    if not same_graph(a.train, b.train) or not np.array_equal(a.valid, b.valid):
        return False
    if a.generator != b.generator:
        return False
    for x, y in zip(a.inference, b.inference):
        if not same_graph(x.graph, y.graph):
            return False
        if not np.array_equal(x.test, y.test) or not np.array_equal(x.filter_extra, y.filter_extra):
            return False
    return True


def load_graph(path: str | os.PathLike) -> KnowledgeGraph:
    """Load a single triple file, or a transductive directory's train+valid+test."""
    path = Path(path)
    if path.is_dir():
        triples = []
        for split in ("train.txt", "valid.txt", "test.txt"):
            if (path / split).exists():
                triples.extend(read_triples(path / split))
        if not triples:
            raise DatasetIOError(f"{path}: no triple files")
        return build_graph(triples)
    return build_graph(read_triples(path))


def dumps_json(obj) -> str:
    """Deterministic JSON used for every report."""
    buf = io.StringIO()
    json.dump(obj, buf, indent=2, sort_keys=True, default=_json_default)
    buf.write("\n")
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, enum.Enum):
        return o.value
    raise TypeError(f"not JSON serializable: {type(o)!r}")
