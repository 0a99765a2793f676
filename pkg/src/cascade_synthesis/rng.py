"""Counter-based generators addressed by (seed, stream names)."""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, *names: object) -> np.random.Generator:
    """Philox generator for one named stream.

    Distinct name tuples give statistically independent streams; the same
    (seed, names) always reproduces the same draws, whatever else ran before.
    """
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed {seed} does not fit in 64 bits")
    key = tuple(zlib.crc32(str(n).encode()) for n in names)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))
