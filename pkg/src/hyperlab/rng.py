"""Deterministic counter-based pseudo-randomness.

Every stochastic routine in the package draws from one documented 64-bit
mixing function (splitmix64).  The i-th variate of the stream with seed
``s`` is ``mix64((s + (i+1)*GOLDEN) mod 2**64)``, so a stream is a pure
function of ``(seed, index)``: values can be produced scalar-by-scalar or
in vectorized blocks and the results are bit-identical.

Trial seeds are derived hierarchically with :func:`derive_seed`, which is
itself just a stream lookup, so concurrent trials never share state.
"""
from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

_G_V = np.uint64(GOLDEN)
_C1_V = np.uint64(_C1)
_C2_V = np.uint64(_C2)

# (value >> 11) yields 53 uniform bits; +1 maps onto (0, 1].
_INV53 = 1.0 / 9007199254740992.0


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x &= MASK
    x ^= x >> 30
    x = (x * _C1) & MASK
    x ^= x >> 27
    x = (x * _C2) & MASK
    x ^= x >> 31
    return x


def stream_u64(seed: int, index: int) -> int:
    """The ``index``-th 64-bit value of the stream with the given seed."""
    return mix64((seed + (index + 1) * GOLDEN) & MASK)


def derive_seed(master: int, index: int) -> int:
    """Child seed number ``index`` of ``master``; reproducible and collision-mixed."""
    return stream_u64(master, index)


def stream_u64_block(seed: int, start: int, count: int) -> np.ndarray:
    """Values ``start .. start+count-1`` of the stream, as a uint64 array."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK) + idx * _G_V
    z ^= z >> np.uint64(30)
    z *= _C1_V
    z ^= z >> np.uint64(27)
    z *= _C2_V
    z ^= z >> np.uint64(31)
    return z


def uniform_block(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms in (0, 1], one per stream index; matches ScalarStream.uniform."""
    u = stream_u64_block(seed, start, count)
    return ((u >> np.uint64(11)).astype(np.float64) + 1.0) * _INV53


class ScalarStream:
    """Sequential view of a splitmix64 stream (seed plus a running index)."""

    __slots__ = ("seed", "pos")

    def __init__(self, seed: int, pos: int = 0):
        self.seed = seed & MASK
        self.pos = pos

    def next_u64(self) -> int:
        v = stream_u64(self.seed, self.pos)
        self.pos += 1
        return v

    def uniform(self) -> float:
        """Uniform in (0, 1]; safe as a log() argument."""
        return ((self.next_u64() >> 11) + 1) * _INV53

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n); n must be positive."""
        # Rejection-free modulo is biased for huge n; n here is far below 2**64
        # so the bias is < n / 2**64 and irrelevant at any tested scale.
        return self.next_u64() % n

    def poisson(self, mu: float) -> int:
        """Poisson variate by Knuth's product method; O(mu) uniforms."""
        if mu <= 0.0:
            return 0
        limit = math.exp(-mu)
        k = 0
        prod = self.uniform()
        while prod > limit:
            k += 1
            prod *= self.uniform()
        return k
