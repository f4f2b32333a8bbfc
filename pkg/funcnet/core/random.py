"""
Seeded random streams

All randomness flows through numpy's PCG64 bit generator. A seed is either used directly
or split into independent child streams through SeedSequence spawning, so concurrent
work never shares a stream.
"""

import zlib
from typing import List

import numpy as np

from funcnet.core.errors import InvalidArgumentError


def make_rng(seed) -> np.random.Generator:
    """PCG64 generator for an integer seed or a SeedSequence"""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, n: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n)


def derived_seed(seed: int, *labels: str) -> np.random.SeedSequence:
    """Stream keyed by a base seed and stable string labels (independent of call order)

    The whole seed is entropy, so seeds differing only above 32 bits give distinct streams.
    Labels go into the spawn key and never alias seed words.
    """
    if int(seed) < 0:
        raise InvalidArgumentError(f"seed must be non-negative, got {seed}")
    spawn_key = tuple(zlib.crc32(label.encode("utf-8")) for label in labels)
    return np.random.SeedSequence(int(seed), spawn_key=spawn_key)
