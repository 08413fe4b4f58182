"""Butterflies: canonical forms, counting constants, rooted local values.

A butterfly is a connected Berge-acyclic uniform hypergraph; its order is its
number of edges, so it spans 1 + order*d vertices.  Canonical codes come from
a layered encoding of the incidence tree rooted at its center: equal codes
mean isomorphic (marked) butterflies, and the automorphism count falls out of
the same pass as the product of multiplicities of identical child subtrees.

Rooted (depth, cap)-values implement the recursive local type of a rooted
butterfly: the depth-0 value is trivial, the pattern of an edge is the
multiset of its d child-subtree values, and a depth-(k+1) value maps each
pattern to the number of root edges carrying it, counts capped at ``s`` with
``s+1`` standing for "many".
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import factorial
from typing import Iterable

from . import hypercore
from .hypercore import Hypergraph

__all__ = [
    "ButterflyType",
    "MarkedButterflyType",
    "CYCLIC",
    "canonical_type",
    "type_from_edges",
    "marked_type_from_edges",
    "enumerate_types",
    "enumerate_marked_types",
    "rooted_value",
    "trivial_value",
    "many",
    "format_value",
    "value_code",
    "max_subdensity",
    "appearance_threshold",
    "count_labelled_copies",
]

CYCLIC = "CYCLIC"

_T_EDGE = 0
_T_VERTEX = 1
_T_MARKED = 2


@dataclass(frozen=True)
class ButterflyType:
    """Isomorphism class of a butterfly, with its counting constants.

    labelled_count is the number of distinct copies on a fixed labelled
    vertex set of size 1 + order*d, i.e. v! / automorphisms.
    """

    d: int
    order: int
    code: bytes
    automorphisms: int = field(compare=False)
    labelled_count: int = field(compare=False)
    witness_edges: tuple[tuple[int, ...], ...] = field(compare=False, repr=False)

    @property
    def vertex_count(self) -> int:
        return 1 + self.order * self.d


@dataclass(frozen=True)
class MarkedButterflyType:
    """Isomorphism class of a butterfly with a distinguished vertex set."""

    d: int
    order: int
    v_star: int
    code: bytes
    automorphisms: int = field(compare=False)
    labelled_count: int = field(compare=False)
    minimal: bool = field(compare=False)
    witness_edges: tuple[tuple[int, ...], ...] = field(compare=False, repr=False)
    witness_marks: frozenset[int] = field(compare=False, repr=False)

    @property
    def vertex_count(self) -> int:
        return 1 + self.order * self.d


# ---------------------------------------------------------------------------
# incidence-tree canonical encoding
# ---------------------------------------------------------------------------


def _incidence_tree(
    d: int,
    edges: list[tuple[int, ...]],
    vertices: list[int],
    marked: frozenset[int] | None = None,
) -> tuple[list[list[int]], list[int]]:
    """Adjacency and node types of the incidence tree on local node ids.

    Vertex nodes come first (in sorted vertex order), then edge nodes.
    Raises ValueError when the input is not a connected acyclic butterfly.
    """
    verts = sorted(vertices)
    vindex = {v: i for i, v in enumerate(verts)}
    V, E = len(verts), len(edges)
    if V == 0:
        raise ValueError("a butterfly has at least one vertex")
    if E * d - V + 1 != 0:
        raise ValueError("not a butterfly: excess != 0")
    adj: list[list[int]] = [[] for _ in range(V + E)]
    for j, e in enumerate(edges):
        node = V + j
        for v in e:
            i = vindex[v]
            adj[i].append(node)
            adj[node].append(i)
    # connectivity: excess 0 + connected <=> tree on V+E nodes
    seen = [False] * (V + E)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    if count != V + E:
        raise ValueError("not a butterfly: disconnected")
    types = [_T_VERTEX] * V + [_T_EDGE] * E
    if marked:
        for v in marked:
            types[vindex[v]] = _T_MARKED
    return adj, types


def _tree_centers(adj: list[list[int]]) -> list[int]:
    n = len(adj)
    if n == 1:
        return [0]
    deg = [len(a) for a in adj]
    leaves = deque(i for i in range(n) if deg[i] == 1)
    removed = 0
    alive = [True] * n
    while n - removed > 2:
        for _ in range(len(leaves)):
            u = leaves.popleft()
            alive[u] = False
            removed += 1
            for w in adj[u]:
                if alive[w]:
                    deg[w] -= 1
                    if deg[w] == 1:
                        leaves.append(w)
    return [i for i in range(n) if alive[i]]


def _rooted_code_aut(adj: list[list[int]], types: list[int], root: int) -> tuple[bytes, int]:
    """Canonical byte code and rooted automorphism count.

    Nodes are assigned (height, rank) ids bottom-up; the rank orders the
    distinct (type, child ids) signatures inside one height layer, so the
    layer tables plus the root id serialize the tree canonically in linear
    size.  The automorphism count multiplies factorials of multiplicities of
    identical child ids over all nodes.
    """
    n = len(adj)
    parent = [-1] * n
    order = [root]
    parent[root] = root
    for u in order:
        for w in adj[u]:
            if parent[w] == -1:
                parent[w] = u
                order.append(w)
    parent[root] = -1
    children: list[list[int]] = [[] for _ in range(n)]
    for u in order[1:]:
        children[parent[u]].append(u)

    height = [0] * n
    for u in reversed(order):
        if children[u]:
            height[u] = 1 + max(height[c] for c in children[u])

    by_height: dict[int, list[int]] = {}
    for u in order:
        by_height.setdefault(height[u], []).append(u)

    ids: list[tuple[int, int] | None] = [None] * n
    aut = 1
    layers: list[tuple] = []
    for h in range(max(by_height) + 1):
        sigs = {}
        node_sigs = []
        for u in by_height.get(h, ()):
            kid_ids = sorted(ids[c] for c in children[u])
            for _, mult in Counter(kid_ids).items():
                aut *= factorial(mult)
            sig = (types[u], tuple(kid_ids))
            node_sigs.append((u, sig))
            sigs[sig] = None
        ranked = sorted(sigs)
        rank = {sig: i for i, sig in enumerate(ranked)}
        for u, sig in node_sigs:
            ids[u] = (h, rank[sig])
        layers.append(tuple(ranked))
    code = repr((ids[root], tuple(layers))).encode("ascii")
    return code, aut


def _canonical_code_aut(adj: list[list[int]], types: list[int]) -> tuple[bytes, int]:
    centers = _tree_centers(adj)
    # the two centers of an incidence tree have different node classes
    # (vertex vs edge), so every automorphism fixes each of them and the
    # rooted automorphism count equals the full one from either rooting
    best = None
    aut = None
    for c in centers:
        code, a = _rooted_code_aut(adj, types, c)
        if best is None or code < best:
            best = code
        aut = a
    assert best is not None and aut is not None
    return best, aut


def type_from_edges(
    d: int, edges: list[tuple[int, ...]], vertices: list[int]
) -> ButterflyType:
    """Canonical type of the butterfly given by explicit edges and vertices."""
    adj, types = _incidence_tree(d, edges, vertices)
    code, aut = _canonical_code_aut(adj, types)
    order = len(edges)
    v = 1 + order * d
    return ButterflyType(
        d=d,
        order=order,
        code=code,
        automorphisms=aut,
        labelled_count=factorial(v) // aut,
        witness_edges=tuple(tuple(e) for e in edges),
    )


def marked_type_from_edges(
    d: int,
    edges: list[tuple[int, ...]],
    vertices: list[int],
    marked: Iterable[int] | frozenset[int],
) -> MarkedButterflyType:
    """Canonical marked type; marking-aware isomorphism and automorphisms."""
    marked = frozenset(int(v) for v in marked)
    vset = set(int(v) for v in vertices)
    if not marked <= vset:
        raise ValueError("marked vertices must belong to the butterfly")
    adj, types = _incidence_tree(d, edges, sorted(vset), marked=marked)
    code, aut = _canonical_code_aut(adj, types)
    order = len(edges)
    v = 1 + order * d
    return MarkedButterflyType(
        d=d,
        order=order,
        v_star=len(marked),
        code=code,
        automorphisms=aut,
        labelled_count=factorial(v) // aut,
        minimal=_is_minimal(edges, marked),
        witness_edges=tuple(tuple(e) for e in edges),
        witness_marks=marked,
    )


def _is_minimal(edges: list[tuple[int, ...]], marked: frozenset[int]) -> bool:
    """Every leaf edge (incident to exactly one other edge) carries a mark."""
    for i, e in enumerate(edges):
        neighbours = sum(
            1 for j, f in enumerate(edges) if j != i and set(e) & set(f)
        )
        if neighbours == 1 and not (set(e) & marked):
            return False
    return True


def canonical_type(H: Hypergraph) -> ButterflyType:
    """Canonical type of a hypergraph that is itself one butterfly component."""
    return type_from_edges(H.d, H.as_edge_list(), list(range(H.n)))


# ---------------------------------------------------------------------------
# enumeration of isomorphism classes
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def enumerate_types(d: int, l: int) -> tuple[ButterflyType, ...]:
    """All isomorphism classes of butterflies of order l, sorted by code.

    Generated by growing: every order-l butterfly arises from an order-(l-1)
    one by attaching a new edge (one shared vertex, d fresh ones), so growing
    from every attachment vertex and deduplicating by code is exhaustive.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if l < 0:
        raise ValueError("order must be >= 0")
    if l == 0:
        return (type_from_edges(d, [], [0]),)
    out: dict[bytes, ButterflyType] = {}
    for base in enumerate_types(d, l - 1):
        v_base = base.vertex_count
        for attach in range(v_base):
            new_edge = tuple(sorted((attach,) + tuple(range(v_base, v_base + d))))
            edges = list(base.witness_edges) + [new_edge]
            t = type_from_edges(d, edges, list(range(v_base + d)))
            out.setdefault(t.code, t)
    return tuple(out[c] for c in sorted(out))


@lru_cache(maxsize=None)
def enumerate_marked_types(
    d: int, l: int, v_star: int, minimal_only: bool = True
) -> tuple[MarkedButterflyType, ...]:
    """Isomorphism classes of v*-marked order-l butterflies, sorted by code."""
    v = 1 + l * d
    if not 0 <= v_star <= v:
        raise ValueError(f"v_star must lie in [0, {v}]")
    out: dict[bytes, MarkedButterflyType] = {}
    for base in enumerate_types(d, l):
        edges = list(base.witness_edges)
        for marks in combinations(range(v), v_star):
            mt = marked_type_from_edges(d, edges, list(range(v)), frozenset(marks))
            if minimal_only and not mt.minimal:
                continue
            out.setdefault(mt.code, mt)
    return tuple(out[c] for c in sorted(out))


# ---------------------------------------------------------------------------
# rooted (depth, cap)-values
# ---------------------------------------------------------------------------


def trivial_value() -> tuple:
    """The unique depth-0 value."""
    return ()


def many(s: int) -> int:
    """The count encoding 'more than s'."""
    return s + 1


def rooted_value(H: Hypergraph, root: int, r: int, s: int):
    """(r, s)-value of the ball B(root, r), or CYCLIC when it is no butterfly.

    Values are nested tuples: a value is a sorted tuple of (pattern, count)
    pairs with zero counts omitted; a pattern is the sorted tuple of the d
    child-subtree values of an edge; counts above s collapse to s+1.
    """
    if r < 0:
        raise ValueError("depth must be >= 0")
    if s < 1:
        raise ValueError("cap must be >= 1")
    if not 0 <= root < H.n:
        raise ValueError(f"vertex {root} out of range [0, {H.n})")
    if r == 0:
        return trivial_value()
    dist = hypercore.ball_distances(H, root, r)
    ball = set(dist)
    edge_ids: set[int] = set()
    for v in ball:
        for e in H.vertex_edges(v):
            e = int(e)
            if e not in edge_ids and all(int(w) in ball for w in H.edges[e]):
                edge_ids.add(e)
    V_b, E_b = len(ball), len(edge_ids)
    if E_b * H.d - V_b + 1 != 0:
        return CYCLIC

    # BFS orientation away from the root; the ball is a tree, so parents are
    # unique and child edges never merge
    parent_edge: dict[int, int] = {root: -1}
    child_edges: dict[int, list[int]] = {v: [] for v in ball}
    edge_children: dict[int, list[int]] = {}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for e in H.vertex_edges(u):
            e = int(e)
            if e not in edge_ids or e == parent_edge[u]:
                continue
            if e in edge_children:
                continue
            kids = [int(w) for w in H.edges[e] if int(w) != u]
            edge_children[e] = kids
            child_edges[u].append(e)
            for w in kids:
                parent_edge[w] = e
                queue.append(w)

    cap = many(s)

    def value(u: int, depth: int):
        if depth == 0:
            return ()
        counts: dict[tuple, int] = {}
        for e in child_edges[u]:
            pattern = tuple(sorted(value(w, depth - 1) for w in edge_children[e]))
            counts[pattern] = counts.get(pattern, 0) + 1
        return tuple(sorted((p, min(c, cap)) for p, c in counts.items()))

    return value(root, r)


def format_value(value, s: int) -> str:
    """Readable rendering with 'M' for the capped count."""
    if value == CYCLIC:
        return CYCLIC
    cap = many(s)

    def fmt(v) -> str:
        if v == ():
            return "*"
        parts = []
        for pattern, count in v:
            inner = ",".join(fmt(x) for x in pattern)
            c = "M" if count == cap else str(count)
            parts.append(f"[{inner}]x{c}")
        return "{" + ";".join(parts) + "}"

    return fmt(value)


def value_code(value) -> str:
    """Stable hex key for JSON serialization."""
    return repr(value).encode("ascii").hex()


# ---------------------------------------------------------------------------
# subhypergraph density and labelled-copy counting
# ---------------------------------------------------------------------------


def max_subdensity(H: Hypergraph) -> Fraction:
    """max |E'| / |V(E')| over nonempty edge subsets (V(E') = union of E')."""
    if H.m == 0:
        raise ValueError("density needs at least one edge")
    if H.n > 12 or H.m > 20:
        raise ValueError("brute-force density limited to n <= 12, m <= 20")
    edge_sets = [frozenset(e) for e in H.as_edge_list()]
    best = Fraction(0)
    for k in range(1, len(edge_sets) + 1):
        for sub in combinations(edge_sets, k):
            verts = frozenset().union(*sub)
            best = max(best, Fraction(k, len(verts)))
    return best


def appearance_threshold(H: Hypergraph) -> Fraction:
    """Exponent a with threshold n**(-a) for containing H: a = 1/rho."""
    return 1 / max_subdensity(H)


def count_labelled_copies(pattern: Hypergraph, v: int) -> int:
    """Distinct copies of the pattern on a fixed labelled v-set.

    Brute force over all v! placements, deduplicated, so automorphisms are
    handled implicitly; v must equal the pattern's vertex count.
    """
    if v != pattern.n:
        raise ValueError("v must equal the pattern's vertex count")
    if v > 9:
        raise ValueError("brute-force copy counting limited to v <= 9")
    edges = pattern.as_edge_list()
    if not edges:
        return 1
    seen: set[frozenset] = set()
    for perm in permutations(range(v)):
        image = frozenset(frozenset(perm[x] for x in e) for e in edges)
        seen.add(image)
    return len(seen)
