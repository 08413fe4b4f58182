"""Exact binomial sampling of the random (d+1)-uniform hypergraph.

Potential edges are indexed 0..C(n,d+1)-1 in colexicographic order through a
combinadic bijection.  Sampling walks that index range with geometric gaps
(gap = floor(log U / log(1-p)) with U uniform on (0,1]), so each potential
edge is present independently with probability p and the expected work is
O(p*N + output) rather than O(N).

Randomness comes from the splitmix64 streams in :mod:`hyperlab.rng`; the
sample is a pure function of the spec and per-trial seeds are derived from a
master seed, so parallel trials are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import rng
from .hypercore import Hypergraph

__all__ = [
    "SampleSpec",
    "rank",
    "unrank",
    "sample",
    "expected_edge_count",
    "derive_seed",
]

derive_seed = rng.derive_seed

_RANK_LIMIT = 1 << 127
# float64 stays integer-exact below 2**53; keep slack for cumulative sums
_VECTOR_LIMIT = 1 << 52


@dataclass(frozen=True)
class SampleSpec:
    """Parameters of one draw: arity d+1, n vertices, edge probability, seed."""

    d: int
    n: int
    p: float
    seed: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if math.comb(self.n, self.d + 1) >= _RANK_LIMIT:
            raise ValueError(
                f"C({self.n}, {self.d + 1}) does not fit in 128 bits"
            )

    @property
    def potential_edges(self) -> int:
        return math.comb(self.n, self.d + 1)


def rank(edge: tuple[int, ...], n: int, d: int) -> int:
    """Colex rank of a strictly increasing (d+1)-tuple."""
    if len(edge) != d + 1:
        raise ValueError(f"expected {d + 1} vertices, got {len(edge)}")
    prev = -1
    r = 0
    for i, v in enumerate(edge):
        if v <= prev:
            raise ValueError("edge must be strictly increasing")
        prev = v
        r += math.comb(v, i + 1)
    if edge[-1] >= n:
        raise ValueError(f"vertex {edge[-1]} out of range [0, {n})")
    return r


def unrank(r: int, n: int, d: int) -> tuple[int, ...]:
    """Inverse of :func:`rank`; r must lie in [0, C(n, d+1))."""
    N = math.comb(n, d + 1)
    if not 0 <= r < N:
        raise ValueError(f"rank {r} out of range [0, {N})")
    out = [0] * (d + 1)
    hi = n
    for k in range(d + 1, 0, -1):
        # binary search: largest x in [k-1, hi) with C(x, k) <= r
        lo, up = k - 1, hi
        while lo + 1 < up:
            mid = (lo + up) // 2
            if math.comb(mid, k) <= r:
                lo = mid
            else:
                up = mid
        out[k - 1] = lo
        r -= math.comb(lo, k)
        hi = lo
    return tuple(out)


def expected_edge_count(spec: SampleSpec) -> float:
    """C(n, d+1) * p."""
    return spec.potential_edges * spec.p


@lru_cache(maxsize=32)
def _comb_tables(n: int, d: int) -> tuple[np.ndarray, ...]:
    # tables[k-1][x] = C(x, k) for x in 0..n, used by the vectorized unrank.
    # Built by the Pascal cumsum recurrence so the int64 entries are exact.
    tables = [np.arange(n + 1, dtype=np.int64)]
    for _ in range(2, d + 2):
        nxt = np.zeros(n + 1, dtype=np.int64)
        nxt[1:] = np.cumsum(tables[-1])[:-1]
        tables.append(nxt)
    return tuple(tables)


def _unrank_block(ranks: np.ndarray, n: int, d: int) -> np.ndarray:
    """Vectorized colex unrank for int64 ranks below 2**52."""
    out = np.empty((ranks.size, d + 1), dtype=np.int64)
    r = ranks.copy()
    if d == 1:
        # closed form: largest b with C(b,2) <= r
        b = ((1.0 + np.sqrt(8.0 * r.astype(np.float64) + 1.0)) / 2.0).astype(np.int64)
        over = b * (b - 1) // 2 > r
        b[over] -= 1
        under = (b + 1) * b // 2 <= r
        b[under] += 1
        out[:, 1] = b
        out[:, 0] = r - b * (b - 1) // 2
        return out
    tables = _comb_tables(n, d)
    for k in range(d + 1, 0, -1):
        tbl = tables[k - 1]
        x = np.searchsorted(tbl, r, side="right") - 1
        out[:, k - 1] = x
        r = r - tbl[x]
    return out


def _gaps_from_uniforms(u: np.ndarray, log1mp: float) -> np.ndarray:
    return np.floor(np.log(u) / log1mp)


def _sample_ranks_vectorized(spec: SampleSpec, N: int) -> np.ndarray:
    log1mp = math.log1p(-spec.p)
    expected = spec.p * N
    block = int(min(max(expected * 1.25 + 16, 16), 65536))
    ranks: list[np.ndarray] = []
    pos = -1  # last inspected rank
    consumed = 0
    while True:
        u = rng.uniform_block(spec.seed, consumed, block)
        consumed += block
        gaps = _gaps_from_uniforms(u, log1mp)
        steps = np.cumsum(gaps + 1.0)
        cand = pos + steps
        inside = cand < N
        if inside.all():
            ranks.append(cand.astype(np.int64))
            pos = int(cand[-1])
            continue
        cut = int(np.argmin(inside))  # first candidate beyond the range
        if cut:
            ranks.append(cand[:cut].astype(np.int64))
        break
    if not ranks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(ranks)


def _sample_ranks_scalar(spec: SampleSpec, N: int) -> list[int]:
    log1mp = math.log1p(-spec.p)
    stream = rng.ScalarStream(spec.seed)
    out: list[int] = []
    pos = -1
    while True:
        gap = math.floor(math.log(stream.uniform()) / log1mp)
        pos += 1 + int(min(gap, float(N)))
        if pos >= N:
            return out
        out.append(pos)


def sample(spec: SampleSpec) -> Hypergraph:
    """Draw G^{d+1}(n, p): every potential edge independently with probability p."""
    N = spec.potential_edges
    d, n = spec.d, spec.n
    if spec.p <= 0.0 or N == 0:
        return Hypergraph(d, n, np.zeros((0, d + 1), dtype=np.int64))
    if spec.p >= 1.0:
        if N <= _VECTOR_LIMIT:
            return Hypergraph(d, n, _unrank_block(np.arange(N, dtype=np.int64), n, d))
        raise ValueError("complete hypergraph too large to materialize")
    if N <= _VECTOR_LIMIT:
        ranks = _sample_ranks_vectorized(spec, N)
        return Hypergraph(d, n, _unrank_block(ranks, n, d))
    rows = [unrank(r, n, d) for r in _sample_ranks_scalar(spec, N)]
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), d + 1)
    return Hypergraph(d, n, arr)
