"""Counter-based normal draws.

Draw number i of stream s under seed k comes from Philox keyed by
(k, s, chunk) with chunk = i // CHUNK, so any chunk can be regenerated
independently and the output does not depend on how work is scheduled.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import ArgumentError

CHUNK = 1 << 16
_U64 = 1 << 64


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < _U64:
        raise ArgumentError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def _chunk(seed: int, stream: int, index: int, size: int) -> np.ndarray:
    key = seed | (stream << 64) | (index << 96)
    raw = np.random.Philox(key=key).random_raw(size)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def normals(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """n standard normal draws for (seed, stream) by inverse-CDF of 53-bit uniforms."""
    seed = check_seed(seed)
    if not 0 <= stream < (1 << 32):
        raise ArgumentError(f"stream index out of range: {stream}")
    out = np.empty(n)
    for start in range(0, n, CHUNK):
        size = min(CHUNK, n - start)
        out[start:start + size] = _chunk(seed, stream, start // CHUNK, size)
    return out
