"""Named random sub-streams derived from a single seed.

Each pipeline stage draws from its own stream, so adding or reordering a
stage never changes the draws seen by another.
"""
import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(key,)))
