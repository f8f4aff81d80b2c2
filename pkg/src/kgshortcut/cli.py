"""``kgshortcut`` command line: audit, eval, spd, sample-*, grid."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .datasets import DatasetBundle, dumps_json, emit_dataset, load_dataset, load_graph
from .errors import DegenerateReport, KgError
from .grid import GridSpec, grid_csv, run_grid
from .ppr import PprConfig
from .ranking import evaluate_dataset
from .samplers.grail import GrailConfig, grail_sample
from .samplers.ilpc import IlpcConfig, ilpc_sample
from .samplers.partition import PartitionConfig, partition_sample
from .samplers.splits import make_splits
from .spd import audit_csv, audit_dataset, delta_spd, ppr_by_spd_bucket, spd_report

log = logging.getLogger("kgshortcut")

EXIT_OK, EXIT_VALIDATION, EXIT_SAMPLING, EXIT_IO = 0, 2, 3, 4


def _write(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ppr_cfg(args) -> PprConfig:
    return PprConfig(alpha=args.alpha, epsilon=args.eps, unit_weights=not args.multiplicity_weights)


def _load(args, path=None, task=None) -> DatasetBundle:
    return load_dataset(path or args.dataset, task if task is not None else args.task, strict=not args.permissive)


def cmd_audit(args):
    cfg = _ppr_cfg(args)
    bundle = _load(args)
    # the parent's layout decides its task (usually transductive)
    parent = load_dataset(args.parent, strict=not args.permissive) if args.parent else None
    report = audit_dataset(bundle, cfg, parent, cap=args.spd_cap, macro=args.macro)
    _write(dumps_json(report.to_dict()), args.out)
    if args.csv:
        _write(audit_csv([report]), args.csv)


def cmd_eval(args):
    report = evaluate_dataset(_load(args), args.heuristic, _ppr_cfg(args))
    _write(dumps_json(report.to_dict()), args.out)


def cmd_spd(args):
    bundle = _load(args)
    buckets = [float(b) for b in args.buckets.split(",")]
    out = {
        "dataset": bundle.name,
        "spd": spd_report(bundle, macro=args.macro, cap=args.spd_cap).to_dict(),
        "ppr_by_spd_bucket": ppr_by_spd_bucket(bundle, _ppr_cfg(args), buckets).to_dict(),
    }
    _write(dumps_json(out), args.out)


def _emit(bundle: DatasetBundle, out: str, selection: dict | None = None):
    deltas = {}
    for i, inf in enumerate(bundle.inference, start=1):
        try:
            deltas[inf.name or f"inference_{i}"] = delta_spd(inf)
        except DegenerateReport:
            deltas[inf.name or f"inference_{i}"] = None
    emit_dataset(bundle, out, delta_spd=deltas, selection=selection)
    log.info("wrote %s (%d inference graph(s))", out, len(bundle.inference))


def _split(sampled: DatasetBundle, args) -> DatasetBundle:
    return make_splits(sampled.train, [inf.graph for inf in sampled.inference], test_fraction=args.test_frac,
                       valid_fraction=args.valid_frac, seed=args.seed, task=sampled.task,
                       name=Path(args.out).name, generator=sampled.generator)


def cmd_sample_grail(args):
    cfg = GrailConfig(args.train_seeds, args.inf_seeds, args.cap_train, args.cap_inf, args.seed)
    _emit(_split(grail_sample(load_graph(args.graph), cfg), args), args.out)


def cmd_sample_ilpc(args):
    cfg = IlpcConfig(args.p, args.seed)
    _emit(_split(ilpc_sample(load_graph(args.graph), cfg), args), args.out)


def cmd_sample_partition(args):
    cfg = PartitionConfig(k=args.k, task=args.task, resolution=args.resolution, min_edges=args.min_edges,
                          new_rel_threshold=args.new_rel_threshold, test_fraction=args.test_frac,
                          valid_fraction=args.valid_frac, rng_seed=args.seed, parent_delta_spd=args.parent_delta_spd)
    bundle, report = partition_sample(load_graph(args.graph), cfg, name=Path(args.out).name,
                                      ppr_cfg=_ppr_cfg(args))
    _emit(bundle, args.out, selection=report)


def cmd_grid(args):
    spec = GridSpec.from_json(args.spec, args.seeds_per_config)
    rows = run_grid(load_graph(args.graph), spec, _ppr_cfg(args), seed=args.seed, jobs=args.jobs)
    failed = sum(r["failures"] for r in rows)
    if failed:
        log.warning("%d grid run(s) failed and were excluded from the means", failed)
    _write(grid_csv(rows), args.out)


def _add_ppr(p):
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--multiplicity-weights", action="store_true",
                   help="weight undirected edges by triple multiplicity instead of 1")


def _add_dataset(p):
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", choices=["e", "er", "trans"], default=None)
    p.add_argument("--permissive", action="store_true", help="load datasets that violate bundle invariants")


def _add_split(p):
    p.add_argument("--test-frac", type=float, default=0.10)
    p.add_argument("--valid-frac", type=float, default=0.10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgshortcut", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="PPR Hits@10 + delta-SPD report, optionally against a parent")
    _add_dataset(p)
    p.add_argument("--parent")
    _add_ppr(p)
    p.add_argument("--spd-cap", type=int, default=None)
    p.add_argument("--macro", action="store_true")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("eval", help="filtered MRR / Hits@K of a heuristic")
    _add_dataset(p)
    p.add_argument("--heuristic", choices=["ppr", "degree"], required=True)
    _add_ppr(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spd", help="delta-SPD and PPR-by-SPD bucket table")
    _add_dataset(p)
    p.add_argument("--macro", action="store_true")
    p.add_argument("--buckets", default="1,2,3,4")
    p.add_argument("--spd-cap", type=int, default=None)
    _add_ppr(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spd)

    p = sub.add_parser("sample-grail", help="legacy seed-neighborhood sampling")
    p.add_argument("--graph", required=True)
    p.add_argument("--train-seeds", type=int, required=True)
    p.add_argument("--inf-seeds", type=int, required=True)
    p.add_argument("--cap-train", type=int, required=True)
    p.add_argument("--cap-inf", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_split(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_grail)

    p = sub.add_parser("sample-ilpc", help="node-split sampling")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    _add_split(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_ilpc)

    p = sub.add_parser("sample-partition", help="Louvain partition-based sampling")
    p.add_argument("--graph", required=True)
    p.add_argument("--task", choices=["e", "er"], required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--min-edges", type=int, default=1000)
    p.add_argument("--new-rel-threshold", type=float, default=0.05)
    p.add_argument("--parent-delta-spd", type=float, default=None)
    _add_split(p)
    _add_ppr(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_partition)

    p = sub.add_parser("grid", help="one-at-a-time grid over the neighborhood sampler")
    p.add_argument("--graph", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--seeds-per-config", type=int, default=3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_ppr(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except KgError as exc:
        log.error("%s", exc)
        return exc.exit_code if exc.exit_code in (EXIT_VALIDATION, EXIT_SAMPLING, EXIT_IO) else 1
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
