"""Time PPR ranking on a synthetic graph the size of FB15k-237.

Without --full, a sample of query sources is timed and the whole run is
extrapolated from the per-source cost.
"""
import argparse
import time

import numpy as np

from kgshortcut.datasets import InferenceGraph
from kgshortcut.graph import build_graph, undirected_view
from kgshortcut.ppr import PprConfig, approx_ppr
from kgshortcut.ranking import Heuristic, rank_inference_graph


def heavy_tailed_kg(n, m, relations, seed):
    """Chung-Lu style sample: endpoints drawn with Pareto weights."""
    rng = np.random.default_rng(seed)
    w = rng.pareto(1.2, n) + 1.0
    p = w / w.sum()
    h = rng.choice(n, m, p=p)
    t = rng.choice(n, m, p=p)
    r = rng.integers(0, relations, m)
    keep = h != t
    return build_graph(zip((f"e{x}" for x in h[keep]), (f"r{x}" for x in r[keep]), (f"e{x}" for x in t[keep])))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--entities", type=int, default=14541)
    ap.add_argument("--triples", type=int, default=272115)
    ap.add_argument("--test", type=int, default=20466)
    ap.add_argument("--sample", type=int, default=300, help="sources to time")
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t0 = time.perf_counter()
    g = heavy_tailed_kg(args.entities, args.triples + args.test, 237, args.seed)
    test = g.triples[: args.test]
    graph = g.subgraph(np.arange(len(g)) >= args.test, extra=g.labeled(test))
    test = graph.encode(g.labeled(test))
    print(f"built graph: {graph.num_entities} entities, {len(graph)} triples in {time.perf_counter() - t0:.1f}s")

    cfg = PprConfig()
    view = undirected_view(graph, unit_weights=True)
    sources = np.unique(np.concatenate([test[:, 0], test[:, 2]]))
    approx_ppr(view, int(sources[0]), cfg)  # jit warm-up

    if args.full:
        t0 = time.perf_counter()
        rank_inference_graph(InferenceGraph(graph, test), Heuristic.PPR, cfg, view)
        print(f"full ranking of {2 * len(test)} queries: {time.perf_counter() - t0:.1f}s")
        return
    pick = np.random.default_rng(args.seed).choice(sources, min(args.sample, len(sources)), replace=False)
    t0 = time.perf_counter()
    pushes = 0
    for s in pick.tolist():
        pushes += approx_ppr(view, s, cfg).pushes
    per = (time.perf_counter() - t0) / len(pick)
    print(f"{per * 1e3:.1f} ms and {pushes / len(pick):.0f} pushes per source; "
          f"{len(sources)} sources -> about {per * len(sources) / 60:.1f} min")


if __name__ == "__main__":
    main()
