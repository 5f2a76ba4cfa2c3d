"""Counter-based random streams.

Every stochastic quantity in a simulation draws from its own Philox stream
keyed by ``(seed, stream_id)``. Streams are independent of the order in which
they are requested, which is what keeps per-pixel work reproducible no matter
how it is scheduled across workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# stream kinds, packed into the high 32 bits of the stream id
LASER_PHASE = 1
PIXEL_NOISE = 2
DRIFT = 3
FRAME = 4


def stream_id(kind: int, index: int) -> int:
    if not 0 <= kind < 2**32 or not 0 <= index < 2**32:
        raise ValueError(f"stream kind/index out of range: {kind}, {index}")
    return (kind << 32) | index


def stream(seed: int, sid: int) -> np.random.Generator:
    """Return a generator for the counter-based stream ``(seed, sid)``."""
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= sid <= _MASK64:
        raise ValueError(f"stream id must be an unsigned 64-bit integer, got {sid}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, sid], dtype=np.uint64)))


def derive_seed(master: int, index: int) -> int:
    """Deterministic child seed, e.g. one per repeated frame."""
    g = stream(master & _MASK64, stream_id(FRAME, index))
    return int(g.integers(0, 2**64, dtype=np.uint64))
