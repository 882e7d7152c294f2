"""Counter-based random streams keyed by (seed, replica, chunk).

Every stream is a Philox generator built from a SeedSequence whose entropy is
the master seed and whose spawn key holds the replica and chunk indices, so any
stream can be rebuilt without replaying the others.
"""
from __future__ import annotations

import numpy as np

CHUNK = 4096  # draws per stream chunk


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derived_seed(master_seed: int, *key: int) -> int:
    """64-bit seed hashed from the master seed and an index tuple."""
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in key)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
