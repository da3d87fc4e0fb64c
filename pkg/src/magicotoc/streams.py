"""Seeded random streams.

Every random draw in the package comes from a generator keyed by the master
seed plus a tuple of integer keys, e.g. ``stream(seed, n_t, repeat, sample)``.
Streams are derived with :class:`numpy.random.SeedSequence`, so sample k
always sees the same numbers no matter which worker evaluates it.
"""

from __future__ import annotations

import numpy as np

# Fixed stream tags keep unrelated consumers apart.
TAG_BOOTSTRAP = 0xB007
TAG_EXACT = 0xE8AC
TAG_PROBE = 0x9B0E
TAG_SANDWICH = 0x5A4D
TAG_CIRCUIT = 0xC1C7


def stream(master_seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(master_seed)] + [int(k) for k in keys]
    if any(v < 0 for v in entropy):
        raise ValueError("seeds and stream keys must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
