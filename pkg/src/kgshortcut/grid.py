"""One-at-a-time parameter grid over the neighborhood sampler."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateReport, SamplingFailed
from .graph import KnowledgeGraph
from .ppr import PprConfig
from .ranking import Heuristic, evaluate_dataset
from .samplers.grail import GrailConfig, grail_sample
from .samplers.splits import make_splits
from .spd import spd_report

log = logging.getLogger(__name__)

COLUMNS = ["train_ents", "inf_ents", "cap_train", "cap_inf", "train_edges", "test_edges", "delta_spd", "ppr_hits10"]
AXES = ("cap_train", "cap_inf", "train_ents", "inf_ents")

REFERENCE_AXES = {
    "cap_train": [10, 15, 25, 50, 100],
    "cap_inf": [10, 25, 50, 100],
    "train_ents": [10, 20, 40],
    "inf_ents": [10, 20, 40, 80, 160],
}


@dataclass
class GridSpec:
    base: dict = field(default_factory=lambda: {"train_ents": 10, "inf_ents": 20, "cap_train": 50, "cap_inf": 50})
    axes: dict = field(default_factory=dict)
    seeds_per_config: int = 3

    @classmethod
    def from_json(cls, path: str | Path, seeds_per_config: int | None = None) -> "GridSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        spec = cls(base={**cls().base, **raw.get("base", {})}, axes=raw.get("axes", {}),
                   seeds_per_config=raw.get("seeds_per_config", 3))
        if seeds_per_config is not None:
            spec.seeds_per_config = seeds_per_config
        spec.validate()
        return spec

    def validate(self):
        for key in self.axes:
            if key not in AXES:
                raise ValueError(f"unknown grid axis {key!r}; expected one of {AXES}")
        for key, values in [("base", list(self.base.values()))] + list(self.axes.items()):
            if any(int(v) < 1 for v in values):
                raise ValueError(f"grid values must be positive ({key})")
        if self.seeds_per_config < 1:
            raise ValueError("seeds_per_config must be >= 1")

    def configurations(self) -> list[dict]:
        """Base configuration with one axis changed at a time, axis by axis.

        The base appears once per axis, as in the reference grid, so four
        axes with 5, 4, 3 and 5 values give 17 rows.
        """
        if not self.axes:
            return [dict(self.base)]
        out = []
        for axis in AXES:
            for value in self.axes.get(axis, []):
                cfg = dict(self.base)
                cfg[axis] = int(value)
                out.append(cfg)
        return out


def _grail_config(row: dict, seed: int) -> GrailConfig:
    return GrailConfig(row["train_ents"], row["inf_ents"], row["cap_train"], row["cap_inf"], seed)


def run_cell(graph: KnowledgeGraph, row: dict, seed: int, ppr_cfg: PprConfig) -> dict | None:
    """Sample, split and score one dataset; None when sampling fails."""
    try:
        sampled = grail_sample(graph, _grail_config(row, seed))
        inf_graph = sampled.inference[0].graph
        bundle = make_splits(sampled.train, [inf_graph], seed=seed, name="grid")
        hits = evaluate_dataset(bundle, Heuristic.PPR, ppr_cfg).aggregate["hits_at_10"]
        delta = spd_report(bundle).delta_spd
    except (SamplingFailed, DegenerateReport) as exc:
        log.warning("grid cell %s seed %d failed: %s", row, seed, exc)
        return None
    return {"train_edges": len(sampled.train), "test_edges": len(inf_graph), "delta_spd": delta, "ppr_hits10": hits}


def _run_cell_args(args):
    return run_cell(*args)


def run_grid(graph: KnowledgeGraph, spec: GridSpec, cfg: PprConfig = PprConfig(), seed: int = 0,
             jobs: int = 1) -> list[dict]:
    """One row per configuration: means over that configuration's successful seeds."""
    configs = spec.configurations()
    tasks = [(graph, row, seed + s, cfg) for row in configs for s in range(spec.seeds_per_config)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_args, tasks))
    else:
        results = [run_cell(*t) for t in tasks]
    rows = []
    per = spec.seeds_per_config
    for i, cfg_row in enumerate(configs):
        runs = [r for r in results[i * per:(i + 1) * per] if r is not None]
        row = dict(cfg_row)
        row["runs"] = len(runs)
        row["failures"] = per - len(runs)
        for key in ("train_edges", "test_edges", "delta_spd", "ppr_hits10"):
            row[key] = float(np.mean([r[key] for r in runs])) if runs else None
        rows.append(row)
    return rows


def _fmt(v) -> str:
    if v is None:
        return "FAILED"
    if isinstance(v, int):
        return str(v)
    return f"{v:.6f}"


def grid_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()
