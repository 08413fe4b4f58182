"""Ehrenfeucht-Fraisse games on finite uniform hypergraphs.

Game: k rounds; Spoiler picks a fresh vertex in either structure, Duplicator
answers with a fresh vertex in the other.  Duplicator wins when, over the
final pick correspondence, every (d+1)-subset is an edge on one side exactly
when it is on the other (the distance variant additionally requires all
pairwise edge-path distances between corresponding picks, premarked pairs
included, to agree, with infinity allowed).

Convention for k exceeding min(|H1|, |H2|): Duplicator wins exactly when the
structures are isomorphic (respecting premarked pairs in the distance game).

The solver is an exact minimax with memoization; states are canonicalized
under pairs of automorphisms when the two automorphism groups are small,
which is what collapses highly symmetric positions.  When Spoiler wins,
distinguishing_formula unwinds a winning strategy into a sentence of
quantifier depth at most k that separates the structures.
"""
from __future__ import annotations

from itertools import combinations

from . import fo
from .hypercore import Hypergraph, ball_distances

__all__ = [
    "GameLimitError",
    "duplicator_wins",
    "duplicator_wins_distance",
    "distinguishing_formula",
    "is_isomorphic",
    "automorphisms",
]

_AUT_PRODUCT_CAP = 20_000
_AUT_COUNT_CAP = 4_000
DEFAULT_MAX_STATES = 2_000_000


class GameLimitError(RuntimeError):
    """The configured state budget was exhausted; the result is unknown."""


class _Structure:
    """Pre-digested view of one hypergraph for game solving."""

    def __init__(self, H: Hypergraph):
        self.H = H
        self.n = H.n
        self.d = H.d
        self.edge_set = {frozenset(int(v) for v in row) for row in H.edges}
        self._auts: list[tuple[int, ...]] | None = None
        self._dist: dict[int, dict[int, int]] = {}

    def automorphism_list(self) -> list[tuple[int, ...]] | None:
        """All automorphisms, or None when past the search cap."""
        if self._auts is None:
            found: list[tuple[int, ...]] = []
            for perm in _isomorphism_search(self, self, cap=_AUT_COUNT_CAP):
                found.append(perm)
                if len(found) > _AUT_COUNT_CAP:
                    self._auts = []
                    return None
            self._auts = found
        return self._auts if self._auts else None

    def distance(self, a: int, b: int) -> int | None:
        """Edge-path distance; None encodes infinity."""
        if a == b:
            return 0
        if a not in self._dist:
            self._dist[a] = ball_distances(self.H, a, self.n)
        return self._dist[a].get(b)


def _isomorphism_search(A: _Structure, B: _Structure, cap: int):
    """Backtracking vertex-map search; yields isomorphisms as tuples (A -> B).

    The incremental check keeps every fully-mapped A-edge an edge of B; with
    equal edge counts and an injective map that forces non-edges onto
    non-edges, so completed maps are isomorphisms.
    """
    if A.n != B.n or A.d != B.d or len(A.edge_set) != len(B.edge_set):
        return
    n = A.n
    deg_a = A.H.degree_array()
    deg_b = B.H.degree_array()
    if sorted(deg_a.tolist()) != sorted(deg_b.tolist()):
        return
    # match in decreasing-degree order for earlier pruning
    order = sorted(range(n), key=lambda v: -int(deg_a[v]))
    mapping = [-1] * n
    used = [False] * n
    a_edges_by_vertex: list[list[frozenset[int]]] = [[] for _ in range(n)]
    for e in A.edge_set:
        for v in e:
            a_edges_by_vertex[v].append(e)
    yielded = 0

    def extend(i: int):
        nonlocal yielded
        if yielded > cap:
            return
        if i == n:
            yielded += 1
            yield tuple(mapping)
            return
        v = order[i]
        for w in range(n):
            if used[w] or deg_a[v] != deg_b[w]:
                continue
            mapping[v] = w
            used[w] = True
            ok = True
            for e in a_edges_by_vertex[v]:
                img = [mapping[x] for x in e]
                if -1 not in img and frozenset(img) not in B.edge_set:
                    ok = False
                    break
            if ok:
                yield from extend(i + 1)
            used[w] = False
            mapping[v] = -1

    yield from extend(0)


def is_isomorphic(
    H1: Hypergraph, H2: Hypergraph, premarked: tuple[tuple[int, int], ...] = ()
) -> bool:
    """Brute-force isomorphism test (optionally fixing premarked pairs)."""
    A, B = _Structure(H1), _Structure(H2)
    for perm in _isomorphism_search(A, B, cap=10**6):
        if _map_edge_count_ok(A, B, perm) and all(perm[a] == b for a, b in premarked):
            return True
    return False


def _map_edge_count_ok(A: _Structure, B: _Structure, perm: tuple[int, ...]) -> bool:
    return all(frozenset(perm[x] for x in e) in B.edge_set for e in A.edge_set)


def automorphisms(H: Hypergraph) -> list[tuple[int, ...]]:
    """All vertex permutations preserving the edge set (small n only)."""
    out = []
    S = _Structure(H)
    for perm in _isomorphism_search(S, S, cap=10**6):
        if _map_edge_count_ok(S, S, perm):
            out.append(perm)
    return out


class _Solver:
    def __init__(
        self,
        H1: Hypergraph,
        H2: Hypergraph,
        *,
        distance: bool = False,
        premarked: tuple[tuple[int, int], ...] = (),
        max_states: int = DEFAULT_MAX_STATES,
    ):
        if H1.d != H2.d:
            raise ValueError("the two hypergraphs must share d")
        self.A = _Structure(H1)
        self.B = _Structure(H2)
        self.d = H1.d
        self.distance = distance
        self.premarked = tuple((int(a), int(b)) for a, b in premarked)
        for a, b in self.premarked:
            if not (0 <= a < H1.n and 0 <= b < H2.n):
                raise ValueError("premarked vertex out of range")
        if len({a for a, _ in self.premarked}) != len(self.premarked) or len(
            {b for _, b in self.premarked}
        ) != len(self.premarked):
            raise ValueError("premarked picks must be distinct within each side")
        self.memo: dict = {}
        self.raw_memo: dict = {}
        self.states = 0
        self.max_states = max_states
        auts1 = self.A.automorphism_list()
        auts2 = self.B.automorphism_list()
        if (
            auts1 is not None
            and auts2 is not None
            and len(auts1) * len(auts2) <= _AUT_PRODUCT_CAP
        ):
            # only automorphisms fixing the premarked pairs keep states equivalent
            self.auts1 = [g for g in auts1 if all(g[a] == a for a, _ in self.premarked)]
            self.auts2 = [g for g in auts2 if all(g[b] == b for _, b in self.premarked)]
        else:
            self.auts1 = [tuple(range(H1.n))]
            self.auts2 = [tuple(range(H2.n))]

    # -- terminal and incremental checks ------------------------------------

    def _pairs_ok_new(self, pairs: tuple[tuple[int, int], ...]) -> bool:
        """Check constraints involving the newest pair only (monotone)."""
        x, y = pairs[-1]
        if self.distance:
            for a, b in pairs[:-1]:
                if self.A.distance(a, x) != self.B.distance(b, y):
                    return False
        if len(pairs) >= self.d + 1:
            others = pairs[:-1]
            for combo in combinations(others, self.d):
                xs = frozenset([x] + [a for a, _ in combo])
                ys = frozenset([y] + [b for _, b in combo])
                if len(xs) == self.d + 1:
                    if (xs in self.A.edge_set) != (ys in self.B.edge_set):
                        return False
        return True

    # -- state canonicalization ---------------------------------------------

    def _key(self, pairs: frozenset[tuple[int, int]], rounds: int):
        best = None
        for g1 in self.auts1:
            for g2 in self.auts2:
                cand = tuple(sorted((g1[a], g2[b]) for a, b in pairs))
                if best is None or cand < best:
                    best = cand
        return (best, rounds)

    # -- minimax -------------------------------------------------------------

    def duplicator_wins_from(
        self, pairs: tuple[tuple[int, int], ...], rounds: int
    ) -> bool:
        if rounds == 0:
            return True  # all constraints were checked incrementally
        raw = (frozenset(pairs), rounds)
        hit = self.raw_memo.get(raw)
        if hit is not None:
            return hit
        key = self._key(raw[0], rounds)
        hit = self.memo.get(key)
        if hit is not None:
            self.raw_memo[raw] = hit
            return hit
        self.states += 1
        if self.states > self.max_states:
            raise GameLimitError(f"state budget {self.max_states} exhausted")
        used1 = {a for a, _ in pairs}
        used2 = {b for _, b in pairs}
        result = True
        # Spoiler moves in H1
        for x in range(self.A.n):
            if x in used1:
                continue
            if not any(
                y not in used2
                and self._pairs_ok_new(pairs + ((x, y),))
                and self.duplicator_wins_from(pairs + ((x, y),), rounds - 1)
                for y in range(self.B.n)
            ):
                result = False
                break
        if result:
            # Spoiler moves in H2
            for y in range(self.B.n):
                if y in used2:
                    continue
                if not any(
                    x not in used1
                    and self._pairs_ok_new(pairs + ((x, y),))
                    and self.duplicator_wins_from(pairs + ((x, y),), rounds - 1)
                    for x in range(self.A.n)
                ):
                    result = False
                    break
        self.memo[key] = result
        self.raw_memo[raw] = result
        return result

    def solve(self, k: int) -> bool:
        free1 = self.A.n - len(self.premarked)
        free2 = self.B.n - len(self.premarked)
        if k > min(free1, free2):
            return is_isomorphic(self.A.H, self.B.H, self.premarked)
        base = tuple(self.premarked)
        for i in range(len(base)):
            if not self._pairs_ok_new(base[: i + 1]):
                return False
        return self.duplicator_wins_from(base, k)


def duplicator_wins(
    H1: Hypergraph, H2: Hypergraph, k: int, *, max_states: int = DEFAULT_MAX_STATES
) -> bool:
    """Exact winner of the k-round game (True = Duplicator)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _Solver(H1, H2, max_states=max_states).solve(k)


def duplicator_wins_distance(
    H1: Hypergraph,
    H2: Hypergraph,
    k: int,
    premarked: tuple[tuple[int, int], ...] = (),
    *,
    max_states: int = DEFAULT_MAX_STATES,
) -> bool:
    """Distance variant, optionally starting with premarked pairs."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _Solver(
        H1, H2, distance=True, premarked=premarked, max_states=max_states
    ).solve(k)


# ---------------------------------------------------------------------------
# distinguishing formulas
# ---------------------------------------------------------------------------


def _var(i: int) -> str:
    return f"v{i + 1}"


def _distinct_guard(new: str, olds: list[str]) -> list[fo.Formula]:
    return [fo.Not(fo.Eq(new, old)) for old in olds]


def _conj(items: list[fo.Formula]) -> fo.Formula:
    dedup: dict[str, fo.Formula] = {}
    for f in items:
        dedup.setdefault(str(f), f)
    out = list(dedup.values())
    if not out:
        return fo.Not(fo.Eq("v1", "v1"))  # unreachable filler
    return out[0] if len(out) == 1 else fo.And(tuple(out))


def _counting_sentence(count: int) -> fo.Formula:
    """'There exist `count` pairwise distinct vertices' (depth = count)."""
    names = [_var(i) for i in range(count)]
    body: fo.Formula = _conj(
        [fo.Not(fo.Eq(a, b)) for a, b in combinations(names, 2)]
    ) if count > 1 else fo.Eq(names[0], names[0])
    for name in reversed(names):
        body = fo.Exists(name, body)
    return body


def _diagram_sentence(H: Hypergraph) -> fo.Formula:
    """Full description of H up to isomorphism; depth |H| + 1."""
    n = H.n
    names = [_var(i) for i in range(n)]
    atoms: list[fo.Formula] = [
        fo.Not(fo.Eq(a, b)) for a, b in combinations(names, 2)
    ]
    edge_set = {frozenset(int(v) for v in row) for row in H.edges}
    for sub in combinations(range(n), H.d + 1):
        atom = fo.EdgeAtom(tuple(names[i] for i in sub))
        atoms.append(atom if frozenset(sub) in edge_set else fo.Not(atom))
    closure = fo.Forall(
        _var(n),
        _conj([fo.Eq(_var(n), nm) for nm in names])
        if n == 1
        else fo.Or(tuple(fo.Eq(_var(n), nm) for nm in names)),
    )
    body: fo.Formula = _conj(atoms + [closure]) if atoms else closure
    for name in reversed(names):
        body = fo.Exists(name, body)
    return body


def _atomic_discriminator(
    solver: _Solver, pairs: tuple[tuple[int, int], ...]
) -> fo.Formula | None:
    """Quantifier-free sentence over the pick variables telling the sides apart."""
    for combo in combinations(range(len(pairs)), solver.d + 1):
        xs = frozenset(pairs[i][0] for i in combo)
        ys = frozenset(pairs[i][1] for i in combo)
        if len(xs) != solver.d + 1:
            continue
        in1 = xs in solver.A.edge_set
        in2 = ys in solver.B.edge_set
        if in1 != in2:
            atom = fo.EdgeAtom(tuple(_var(i) for i in combo))
            return atom if in1 else fo.Not(atom)
    return None


def _formula_from_state(
    solver: _Solver, pairs: tuple[tuple[int, int], ...], rounds: int
) -> fo.Formula:
    """Sentence true at the H1 side and false at the H2 side of the state.

    Precondition: Duplicator loses the state, so either the picks already
    disagree or Spoiler has a winning move.
    """
    atom = _atomic_discriminator(solver, pairs)
    if atom is not None:
        return atom
    assert rounds > 0, "Duplicator loses only via a mismatch or a winning move"
    t = len(pairs)
    new = _var(t)
    olds = [_var(i) for i in range(t)]
    used1 = {a for a, _ in pairs}
    used2 = {b for _, b in pairs}
    # winning Spoiler move in H1: exists x such that all replies lose
    for x in range(solver.A.n):
        if x in used1:
            continue
        if not any(
            y not in used2
            and solver._pairs_ok_new(pairs + ((x, y),))
            and solver.duplicator_wins_from(pairs + ((x, y),), rounds - 1)
            for y in range(solver.B.n)
        ):
            subs: list[fo.Formula] = list(_distinct_guard(new, olds))
            for y in range(solver.B.n):
                if y in used2:
                    continue
                subs.append(
                    _formula_from_state(solver, pairs + ((x, y),), rounds - 1)
                )
            return fo.Exists(new, _conj(subs))
    # otherwise the winning move is in H2
    for y in range(solver.B.n):
        if y in used2:
            continue
        if not any(
            x not in used1
            and solver._pairs_ok_new(pairs + ((x, y),))
            and solver.duplicator_wins_from(pairs + ((x, y),), rounds - 1)
            for x in range(solver.A.n)
        ):
            branches: list[fo.Formula] = []
            for x in range(solver.A.n):
                if x in used1:
                    continue
                branches.append(
                    _formula_from_state(solver, pairs + ((x, y),), rounds - 1)
                )
            guard = _conj(_distinct_guard(new, olds)) if olds else None
            inner: fo.Formula
            if not branches:
                inner = fo.Not(fo.Eq(new, new))  # H1 has no fresh vertex: false
            elif len(branches) == 1:
                inner = branches[0]
            else:
                inner = fo.Or(tuple(branches))
            body = fo.Implies(guard, inner) if guard is not None else inner
            return fo.Forall(new, body)
    raise AssertionError("no winning Spoiler move found in a losing state")


def distinguishing_formula(
    H1: Hypergraph, H2: Hypergraph, k: int, *, max_states: int = DEFAULT_MAX_STATES
) -> fo.Formula | None:
    """None when Duplicator wins; otherwise a depth <= k separating sentence."""
    if k < 0:
        raise ValueError("k must be >= 0")
    solver = _Solver(H1, H2, max_states=max_states)
    if k > min(H1.n, H2.n):
        if is_isomorphic(H1, H2):
            return None
        if H1.n != H2.n:
            # 'there are min+1 distinct vertices' separates; depth min+1 <= k
            return _counting_sentence(min(H1.n, H2.n) + 1)
        return _diagram_sentence(H1)
    if solver.solve(k):
        return None
    return _formula_from_state(solver, (), k)
