"""Counter-based random streams keyed by integer tuples.

Every consumer of randomness gets its own ``numpy.random.Generator`` backed by
Philox, seeded through ``SeedSequence(entropy=seed, spawn_key=keys)``.  Two
streams with different key tuples are statistically independent, and a stream
depends only on ``(seed, *keys)``, never on the order in which streams are
created.  That is what makes experiment tables independent of worker count.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "derive_seed"]

_MASK64 = (1 << 64) - 1


def _sequence(seed: int, keys: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(int(k) for k in keys))


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Return the generator for stream ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(_sequence(seed, keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a 64-bit child seed, used where an API takes a plain integer seed."""
    lo, hi = _sequence(seed, keys).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)
