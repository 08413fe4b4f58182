"""The Poisson butterfly process and exact local value distributions.

The process B(r, mu) grows a rooted butterfly: the root gets Poisson(mu)
edges, every vertex of generation < r gets Poisson(mu) further edges on d
fresh vertices each, and growth halts after generation r.

The exact (r, s)-value distribution follows the recursion behind the
process: the d child subtrees of an edge are independent with the
depth-(j-1) value law, a pattern's probability is the multinomial over that
multiset, and the number of root edges carrying each pattern is an
independent Poisson(p_pattern * mu) capped at s, with the exact Poisson tail
collapsed onto the "many" symbol.  The returned distribution is kept in
product form over patterns, so point probabilities and total-variation
distances stay available when the dense value table would not fit memory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import Mapping

import numpy as np

from . import butterfly, rng
from .butterfly import CYCLIC
from .hypercore import Hypergraph

__all__ = [
    "StateSpaceError",
    "ValueDistribution",
    "sample_process",
    "sample_value",
    "sample_values",
    "exact_value_distribution",
    "local_limit_distance",
]

DEFAULT_DENSE_LIMIT = 300_000


class StateSpaceError(RuntimeError):
    """The requested value table exceeds the configured size."""

    def __init__(self, size: int, limit: int, where: str):
        self.size = size
        self.limit = limit
        super().__init__(
            f"|VAL| = {size} exceeds the table limit {limit} ({where})"
        )


def _capped_poisson(mean: float, s: int) -> tuple[float, ...]:
    """pmf over counts 0..s plus the upper tail mass on s+1."""
    pmf = [math.exp(-mean) if mean > 0 else 1.0]
    for j in range(1, s + 1):
        pmf.append(pmf[-1] * mean / j)
    head = sum(pmf)
    return tuple(pmf + [max(0.0, 1.0 - head)])


@dataclass(frozen=True)
class ValueDistribution:
    """Exact law of the depth-r value of B(r, mu), in product form.

    patterns[i] carries probability pattern_probs[i] per root edge; the
    count of root edges with pattern i is Poisson(pattern_probs[i]*mu)
    capped at s.  A value's probability multiplies the per-pattern count
    probabilities; values over unknown patterns have probability zero.
    """

    d: int
    r: int
    s: int
    mu: float
    patterns: tuple
    pattern_probs: tuple[float, ...]
    count_pmfs: tuple[tuple[float, ...], ...]

    def support_size(self) -> int:
        return (self.s + 2) ** len(self.patterns)

    def prob(self, value) -> float:
        if value == CYCLIC:
            return 0.0
        if self.r == 0:
            return 1.0 if value == butterfly.trivial_value() else 0.0
        index = {p: i for i, p in enumerate(self.patterns)}
        counts = [0] * len(self.patterns)
        for pattern, c in value:
            i = index.get(pattern)
            if i is None:
                return 0.0
            if not 0 <= c <= self.s + 1:
                return 0.0
            counts[i] = c
        out = 1.0
        for i, c in enumerate(counts):
            out *= self.count_pmfs[i][c]
        return out

    def total_mass(self) -> float:
        """Analytic total: the product of per-pattern pmf sums."""
        out = 1.0
        for pmf in self.count_pmfs:
            out *= sum(pmf)
        return out

    def as_dict(self, limit: int = DEFAULT_DENSE_LIMIT) -> dict:
        """Dense value -> probability map; raises StateSpaceError when huge."""
        if self.r == 0:
            return {butterfly.trivial_value(): 1.0}
        size = self.support_size()
        if size > limit:
            raise StateSpaceError(size, limit, f"depth {self.r}")
        out: dict = {}
        for counts in product(range(self.s + 2), repeat=len(self.patterns)):
            prob = 1.0
            for i, c in enumerate(counts):
                prob *= self.count_pmfs[i][c]
            value = tuple(
                sorted((self.patterns[i], c) for i, c in enumerate(counts) if c)
            )
            out[value] = out.get(value, 0.0) + prob
        return out

    def tv_against_counts(self, observed: Mapping, total: int | None = None) -> float:
        """Total-variation distance to an empirical distribution.

        `observed` maps values (and possibly CYCLIC) to counts.  Only the
        observed support is enumerated: the remaining exact mass is
        1 - sum of exact probabilities over that support.
        """
        if total is None:
            total = sum(observed.values())
        if total <= 0:
            raise ValueError("observed counts are empty")
        diff = 0.0
        exact_seen = 0.0
        for value, cnt in observed.items():
            q = self.prob(value)
            exact_seen += q
            diff += abs(cnt / total - q)
        diff += max(0.0, 1.0 - exact_seen)
        return 0.5 * diff


def exact_value_distribution(
    d: int, r: int, s: int, mu: float, dense_limit: int = DEFAULT_DENSE_LIMIT
) -> ValueDistribution:
    """Exact depth-r value distribution of B(r, mu)."""
    if d < 1 or r < 0 or s < 1 or mu < 0:
        raise ValueError("need d >= 1, r >= 0, s >= 1, mu >= 0")
    if r == 0:
        return ValueDistribution(d, 0, s, mu, (), (), ())
    # dense distributions of depth-j values for j < r
    values: dict = {butterfly.trivial_value(): 1.0}
    for depth in range(1, r):
        values = _next_dense(values, d, s, mu, depth, dense_limit)
    patterns, pattern_probs = _pattern_layer(values, d)
    pmfs = tuple(_capped_poisson(p * mu, s) for p in pattern_probs)
    return ValueDistribution(d, r, s, mu, patterns, tuple(pattern_probs), pmfs)


def _pattern_layer(values: dict, d: int) -> tuple[tuple, tuple[float, ...]]:
    items = sorted(values.items())
    patterns = []
    probs = []
    for combo in combinations_with_replacement(range(len(items)), d):
        pattern = tuple(sorted(items[i][0] for i in combo))
        weight = math.factorial(d)
        prob = 1.0
        mult: dict[int, int] = {}
        for i in combo:
            mult[i] = mult.get(i, 0) + 1
            prob *= items[i][1]
        for k in mult.values():
            weight //= math.factorial(k)
        patterns.append(pattern)
        probs.append(weight * prob)
    return tuple(patterns), tuple(probs)


def _next_dense(values: dict, d: int, s: int, mu: float, depth: int, limit: int) -> dict:
    patterns, pattern_probs = _pattern_layer(values, d)
    size = (s + 2) ** len(patterns)
    if size > limit:
        raise StateSpaceError(size, limit, f"depth {depth}")
    pmfs = [_capped_poisson(p * mu, s) for p in pattern_probs]
    out: dict = {}
    for counts in product(range(s + 2), repeat=len(patterns)):
        prob = 1.0
        for i, c in enumerate(counts):
            prob *= pmfs[i][c]
        if prob == 0.0:
            continue
        value = tuple(sorted((patterns[i], c) for i, c in enumerate(counts) if c))
        out[value] = out.get(value, 0.0) + prob
    return out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_process(d: int, r: int, mu: float, seed: int) -> Hypergraph:
    """One realization of B(r, mu), rooted at vertex 0."""
    if d < 1 or r < 0 or mu < 0:
        raise ValueError("need d >= 1, r >= 0, mu >= 0")
    stream = rng.ScalarStream(seed)
    edges: list[tuple[int, ...]] = []
    n = 1
    frontier = [0]
    for _ in range(r):
        nxt: list[int] = []
        for v in frontier:
            for _ in range(stream.poisson(mu)):
                fresh = list(range(n, n + d))
                n += d
                edges.append(tuple(sorted([v] + fresh)))
                nxt.extend(fresh)
        frontier = nxt
    return Hypergraph(d, n, np.array(edges, dtype=np.int64).reshape(len(edges), d + 1))


def sample_value(d: int, r: int, s: int, mu: float, stream: rng.ScalarStream):
    """Depth-r value of a process realization, grown lazily."""
    if r == 0:
        return butterfly.trivial_value()
    cap = butterfly.many(s)
    counts: dict = {}
    for _ in range(stream.poisson(mu)):
        pattern = tuple(sorted(sample_value(d, r - 1, s, mu, stream) for _ in range(d)))
        counts[pattern] = counts.get(pattern, 0) + 1
    return tuple(sorted((p, min(c, cap)) for p, c in counts.items()))


def sample_values(d: int, r: int, s: int, mu: float, count: int, seed: int) -> dict:
    """Empirical value counter over `count` independent process draws.

    Vectorized level-by-level with a small Poisson inversion table; the
    per-draw randomness differs from sample_value's stream usage, but the
    law is identical (property-tested against the exact distribution).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if r == 0:
        return {butterfly.trivial_value(): count}
    # Poisson inversion table; the tail beyond the cutoff is below 1e-12
    k_max = int(mu + 8 * math.sqrt(mu + 1.0) + 16)
    cdf = np.cumsum(
        [
            math.exp(-mu + k * math.log(mu) - math.lgamma(k + 1))
            if mu > 0
            else (1.0 if k == 0 else 0.0)
            for k in range(k_max + 1)
        ]
    )
    consumed = 0

    def poisson_block(m: int) -> np.ndarray:
        nonlocal consumed
        u = rng.uniform_block(seed, consumed, m)
        consumed += m
        return np.searchsorted(cdf, u).astype(np.int64)

    layer_sizes = [count]
    edge_counts: list[np.ndarray] = []
    for _ in range(r):
        k = poisson_block(layer_sizes[-1])
        edge_counts.append(k)
        layer_sizes.append(int(k.sum()) * d)

    # values bottom-up; vertices at the deepest layer carry the trivial
    # depth-0 value, encoded as id 0 of the running table
    value_ids = np.zeros(layer_sizes[r], dtype=np.int64)
    table: list = [butterfly.trivial_value()]
    cap = butterfly.many(s)
    for depth in range(r - 1, -1, -1):
        m = layer_sizes[depth]
        k = edge_counts[depth]
        n_edges = int(k.sum())
        if n_edges == 0:
            value_ids = np.zeros(m, dtype=np.int64)
            table = [butterfly.trivial_value()]
            continue
        child_ids = np.sort(value_ids.reshape(n_edges, d), axis=1)
        uniq_rows, pattern_idx = np.unique(child_ids, axis=0, return_inverse=True)
        pattern_idx = pattern_idx.reshape(-1)
        pat_table = [tuple(sorted(table[int(i)] for i in row)) for row in uniq_rows]
        P = len(pat_table)
        edge_parent = np.repeat(np.arange(m, dtype=np.int64), k)
        counts = np.bincount(edge_parent * P + pattern_idx, minlength=m * P)
        counts = np.minimum(counts.reshape(m, P), cap)
        uniq_counts, value_ids = np.unique(counts, axis=0, return_inverse=True)
        value_ids = value_ids.reshape(-1)
        table = [
            tuple(sorted((pat_table[i], int(c)) for i, c in enumerate(row) if c))
            for row in uniq_counts
        ]
        value_ids = value_ids.astype(np.int64)
    hist = np.bincount(value_ids, minlength=len(table))
    return {table[i]: int(hist[i]) for i in range(len(table)) if hist[i]}


def local_limit_distance(
    H: Hypergraph, r: int, s: int, mu: float, roots: int, seed: int,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
) -> float:
    """TV distance between the empirical local value law over sampled roots
    (cyclic balls bucketed separately) and the exact process law."""
    if H.n == 0:
        raise ValueError("needs at least one vertex")
    if roots < 1:
        raise ValueError("needs at least one root")
    exact = exact_value_distribution(H.d, r, s, mu, dense_limit)
    stream = rng.ScalarStream(seed)
    observed: dict = {}
    for _ in range(roots):
        v = stream.randint(H.n)
        val = butterfly.rooted_value(H, v, r, s)
        observed[val] = observed.get(val, 0) + 1
    return exact.tv_against_counts(observed, roots)
