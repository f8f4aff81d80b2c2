"""Partition sampling vs neighborhood sampling on a graph with locality.

A synthetic stand-in for the benchmark comparison: over three seeds the
partition bundles should track the parent's delta-SPD more closely and be
harder for PPR than neighborhood-sampled bundles.
"""
import numpy as np
import pytest

from kgshortcut.datasets import DatasetBundle, InferenceGraph, Task
from kgshortcut.ppr import PprConfig
from kgshortcut.ranking import evaluate_dataset
from kgshortcut.samplers.grail import GrailConfig, grail_sample
from kgshortcut.samplers.partition import PartitionConfig, partition_sample
from kgshortcut.samplers.splits import make_splits, split_graph
from kgshortcut.spd import spd_report
from kgshortcut.synthetic import geometric_kg


@pytest.mark.slow
def test_partition_bundles_track_parent():
    g = geometric_kg(seed=0)
    held, test, _ = split_graph(g, 0.1, np.random.default_rng(1))
    parent = DatasetBundle("parent", Task.TRANSDUCTIVE, held, np.zeros((0, 3)), [InferenceGraph(held, test)])
    parent_delta = spd_report(parent).delta_spd
    cfg = PprConfig()
    part_hits, part_dev, grail_hits, grail_dev = [], [], [], []
    for seed in range(3):
        bundle, _ = partition_sample(g, PartitionConfig(k=3, resolution=0.3, min_edges=500, rng_seed=seed,
                                                        parent_delta_spd=parent_delta))
        part_hits.append(evaluate_dataset(bundle, "ppr", cfg).aggregate["hits_at_10"])
        part_dev.append(abs(spd_report(bundle).delta_spd - parent_delta))
        sampled = grail_sample(g, GrailConfig(rng_seed=seed))
        legacy = make_splits(sampled.train, [sampled.inference[0].graph], seed=seed)
        grail_hits.append(evaluate_dataset(legacy, "ppr", cfg).aggregate["hits_at_10"])
        grail_dev.append(abs(spd_report(legacy).delta_spd - parent_delta))
    assert np.mean(part_dev) < np.mean(grail_dev)
    assert np.mean(part_hits) < np.mean(grail_hits)
