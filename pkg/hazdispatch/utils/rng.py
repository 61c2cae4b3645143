"""
Seeded random streams
"""

import zlib
from typing import Dict

import numpy as np

INIT = "init"
NOISE = "noise"
SOLVER = "solver"
BASELINE = "baseline"

STREAM_TAGS = (INIT, NOISE, SOLVER, BASELINE)


def _tag_key(tag: str) -> int:
    # crc32 rather than hash(): hash() is salted per process
    return zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF


def derive_rng(seed: int, tag: str) -> np.random.Generator:
    """
    Get an independent generator for one purpose of one episode.

    Streams with different tags never share state, so drawing more
    numbers from one (e.g. a larger solver budget) leaves the others
    untouched.
    """
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    return np.random.default_rng([int(seed), _tag_key(tag)])


def episode_streams(seed: int) -> Dict[str, np.random.Generator]:
    """All named streams of an episode"""
    return {tag: derive_rng(seed, tag) for tag in STREAM_TAGS}
