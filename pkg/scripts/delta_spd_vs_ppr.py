"""Audit several datasets and correlate delta-SPD with PPR Hits@10.

    python scripts/delta_spd_vs_ppr.py data/WN18RR_v1 data/fb237_v4 ... --csv audit.csv
"""
import argparse
import logging

from kgshortcut.datasets import load_dataset
from kgshortcut.errors import UndefinedCorrelation
from kgshortcut.ppr import PprConfig
from kgshortcut.spd import audit_csv, audit_dataset, pearson


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("datasets", nargs="+")
    ap.add_argument("--csv", default=None)
    ap.add_argument("--permissive", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    reports = []
    for path in args.datasets:
        rep = audit_dataset(load_dataset(path, strict=not args.permissive), PprConfig())
        logging.info("%-24s delta-SPD %6.3f  PPR Hits@10 %5.1f", rep.dataset, rep.spd.delta_spd,
                     rep.mean_ppr_hits_at_10)
        reports.append(rep)
    text = audit_csv(reports)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        print(text, end="")
    try:
        r = pearson([x.spd.delta_spd for x in reports], [x.mean_ppr_hits_at_10 for x in reports])
        logging.info("pearson r = %.3f over %d datasets", r, len(reports))
    except (UndefinedCorrelation, ValueError) as exc:
        logging.info("correlation undefined: %s", exc)


if __name__ == "__main__":
    main()
