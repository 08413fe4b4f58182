"""Exact structural statistics of one hypergraph.

Counts butterfly components by canonical type, minimal marked-butterfly
copies, unicyclic components by core signature, and evaluates the
component-structure events D_l and their elementary approximation tilde-D_l.

A copy of a marked butterfly is an edge subset isomorphic to the model where
every marked vertex has the same degree in the host as in the model, so
candidate marked vertices are exactly those whose full degree equals their
in-subset degree.  Copy search is anchored at vertices of degree <= l_max,
which are rare in the sparse windows under study; the anchoring is exact for
every type with at least one mark, and the two markless minimal shapes
(a lone vertex, a lone edge) have closed-form counts n and m.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from . import butterfly, hypercore
from .hypercore import (
    KIND_BUTTERFLY,
    KIND_ISOLATED,
    KIND_MULTICYCLIC,
    KIND_UNICYCLIC,
    ComponentMap,
    Hypergraph,
)

__all__ = [
    "CensusReport",
    "census",
    "butterfly_component_counts",
    "minimal_marked_copy_counts",
    "D_l",
    "tilde_D_l",
    "small_degree_near_cycle",
    "two_core",
    "core_signature",
    "unicyclic_core_counts",
]

SCHEMA_VERSION = 1
LARGE_CORE = "large-core"
_CORE_VERTEX_LIMIT = 12


@dataclass
class CensusReport:
    """One-shot structural census; see census() for field semantics."""

    d: int
    n: int
    edge_count: int
    l_max: int
    vstar_max: int
    k_small: int
    connected: bool
    mu: int
    component_count: int
    multicyclic_count: int
    min_degree: int | None
    small_degree_count: int
    butterfly_counts: dict[tuple[int, bytes], int]
    marked_counts: dict[tuple[int, int, bytes], int]
    unicyclic_by_core: dict[str, int]
    butterfly_types: dict[bytes, butterfly.ButterflyType] = field(repr=False)
    marked_types: dict[bytes, butterfly.MarkedButterflyType] = field(repr=False)

    def to_json_dict(self) -> dict:
        bc = {}
        for (l, code), cnt in sorted(self.butterfly_counts.items()):
            bc[code.hex()] = {"order": l, "count": cnt}
        mc = []
        for (l, v_star, code), cnt in sorted(self.marked_counts.items()):
            mc.append(
                {"order": l, "v_star": v_star, "code": code.hex(), "count": cnt}
            )
        types = {
            code.hex(): {
                "order": t.order,
                "automorphisms": t.automorphisms,
                "labelled_count": t.labelled_count,
            }
            for code, t in sorted(self.butterfly_types.items())
        }
        mtypes = {
            code.hex(): {
                "order": t.order,
                "v_star": t.v_star,
                "labelled_count": t.labelled_count,
                "minimal": t.minimal,
            }
            for code, t in sorted(self.marked_types.items())
        }
        return {
            "schema_version": SCHEMA_VERSION,
            "d": self.d,
            "n": self.n,
            "edge_count": self.edge_count,
            "l_max": self.l_max,
            "vstar_max": self.vstar_max,
            "k_small": self.k_small,
            "connected": self.connected,
            "mu": self.mu,
            "component_count": self.component_count,
            "multicyclic_count": self.multicyclic_count,
            "min_degree": self.min_degree,
            "small_degree_count": self.small_degree_count,
            "butterfly_components": bc,
            "marked_copies": mc,
            "unicyclic_by_core": dict(sorted(self.unicyclic_by_core.items())),
            "butterfly_types": types,
            "marked_types": mtypes,
        }


def butterfly_component_counts(
    H: Hypergraph, comp: ComponentMap, l_max: int
) -> tuple[dict[tuple[int, bytes], int], dict[bytes, butterfly.ButterflyType]]:
    """A^type(l) for all butterfly components of order <= l_max (order 0 included)."""
    counts: dict[tuple[int, bytes], int] = {}
    types: dict[bytes, butterfly.ButterflyType] = {}
    iso = int(np.count_nonzero((comp.excess == 0) & (comp.edge_counts == 0)))
    if iso:
        t0 = butterfly.enumerate_types(H.d, 0)[0]
        counts[(0, t0.code)] = iso
        types[t0.code] = t0
    idx = np.nonzero(
        (comp.excess == 0) & (comp.edge_counts >= 1) & (comp.edge_counts <= l_max)
    )[0]
    for i in idx:
        edges = [H.edge(int(j)) for j in comp.edge_indices_of(int(i))]
        verts = [int(v) for v in comp.vertices_of(int(i))]
        t = butterfly.type_from_edges(H.d, edges, verts)
        key = (t.order, t.code)
        counts[key] = counts.get(key, 0) + 1
        types.setdefault(t.code, t)
    return counts, types


def _connected_acyclic_subsets(
    H: Hypergraph, anchors: Iterable[int], l_max: int
) -> set[frozenset[int]]:
    """Connected Berge-acyclic edge subsets of size <= l_max meeting an anchor.

    Growth keeps acyclicity by only adding edges sharing exactly one vertex
    with the current subset.
    """
    found: set[frozenset[int]] = set()
    for a in anchors:
        for e0 in H.vertex_edges(int(a)):
            seed = frozenset((int(e0),))
            if seed in found:
                continue
            stack = [(seed, frozenset(int(x) for x in H.edges[int(e0)]))]
            found.add(seed)
            while stack:
                subset, verts = stack.pop()
                if len(subset) == l_max:
                    continue
                candidates: set[int] = set()
                for v in verts:
                    candidates.update(int(x) for x in H.vertex_edges(v))
                for f in candidates:
                    if f in subset:
                        continue
                    fverts = frozenset(int(x) for x in H.edges[f])
                    if len(fverts & verts) != 1:
                        continue
                    nxt = subset | {f}
                    if nxt in found:
                        continue
                    found.add(nxt)
                    stack.append((nxt, verts | fverts))
    return found


def minimal_marked_copy_counts(
    H: Hypergraph,
    l_max: int,
    vstar_max: int,
    wanted: set[tuple[int, int]] | None = None,
) -> tuple[dict[tuple[int, int, bytes], int], dict[bytes, butterfly.MarkedButterflyType]]:
    """A(l, v*, type) for minimal marked types with l <= l_max, v* <= vstar_max.

    `wanted` optionally restricts counting to specific (l, v*) pairs, which
    prunes the per-subset marking work (the subset enumeration itself still
    follows every anchor).
    """
    counts: dict[tuple[int, int, bytes], int] = {}
    types: dict[bytes, butterfly.MarkedButterflyType] = {}
    deg = H.degree_array()

    def want(l: int, v_star: int) -> bool:
        return wanted is None or (l, v_star) in wanted

    def record(l: int, v_star: int, mt: butterfly.MarkedButterflyType, amount: int = 1):
        key = (l, v_star, mt.code)
        counts[key] = counts.get(key, 0) + amount
        types.setdefault(mt.code, mt)

    # order 0: a lone vertex; marked means degree 0 in the host
    if vstar_max >= 0 and H.n and want(0, 0):
        t00 = butterfly.enumerate_marked_types(H.d, 0, 0)[0]
        record(0, 0, t00, H.n)
    if vstar_max >= 1 and H.n and want(0, 1):
        isolated = int(np.count_nonzero(deg == 0))
        if isolated:
            t01 = butterfly.enumerate_marked_types(H.d, 0, 1)[0]
            record(0, 1, t01, isolated)
    if l_max < 1 or H.m == 0:
        return counts, types
    # order 1, markless: a lone edge has no leaf edges, so it is minimal
    if want(1, 0):
        t10 = butterfly.enumerate_marked_types(H.d, 1, 0)[0]
        record(1, 0, t10, H.m)
    if vstar_max < 1:
        return counts, types

    anchors = np.nonzero((deg >= 1) & (deg <= l_max))[0]
    if anchors.size == 0:
        return counts, types
    for subset in _connected_acyclic_subsets(H, anchors, l_max):
        l = len(subset)
        stars = [
            v for v in range(1, vstar_max + 1) if want(l, v)
        ]
        if not stars:
            continue
        edge_list = [H.edge(j) for j in sorted(subset)]
        sub_deg: dict[int, int] = {}
        for e in edge_list:
            for v in e:
                sub_deg[v] = sub_deg.get(v, 0) + 1
        eligible = sorted(v for v, dv in sub_deg.items() if int(deg[v]) == dv)
        if not eligible:
            continue
        verts = sorted(sub_deg)
        for v_star in stars:
            if v_star > len(eligible):
                continue
            for marks in combinations(eligible, v_star):
                mset = frozenset(marks)
                if not butterfly._is_minimal(edge_list, mset):
                    continue
                mt = butterfly.marked_type_from_edges(H.d, edge_list, verts, mset)
                record(l, v_star, mt)
    return counts, types


# ---------------------------------------------------------------------------
# cycle structure
# ---------------------------------------------------------------------------


def two_core(H: Hypergraph) -> tuple[np.ndarray, np.ndarray]:
    """(vertex mask, edge mask) of the incidence-graph 2-core.

    Iteratively removes incidence nodes of degree <= 1; what survives is the
    union of all Berge cycles plus the paths joining them.
    """
    n, m = H.n, H.m
    v_alive = np.ones(n, dtype=bool)
    e_alive = np.ones(m, dtype=bool)
    if m == 0:
        v_alive[:] = False
        return v_alive, e_alive
    vdeg = H.degree_array().copy()
    everts = [set(int(x) for x in row) for row in H.edges]
    queue: deque = deque()
    for v in range(n):
        if vdeg[v] <= 1:
            queue.append(("v", v))
    for j in range(m):
        if len(everts[j]) <= 1:
            queue.append(("e", j))
    while queue:
        kind, x = queue.popleft()
        if kind == "v":
            if not v_alive[x]:
                continue
            v_alive[x] = False
            for j in H.vertex_edges(x):
                j = int(j)
                if e_alive[j] and x in everts[j]:
                    everts[j].discard(x)
                    if len(everts[j]) <= 1:
                        queue.append(("e", j))
        else:
            if not e_alive[x]:
                continue
            e_alive[x] = False
            for v in everts[x]:
                if v_alive[v]:
                    vdeg[v] -= 1
                    if vdeg[v] <= 1:
                        queue.append(("v", v))
            everts[x].clear()
    v_alive &= vdeg >= 2
    return v_alive, e_alive


def core_signature(H: Hypergraph, comp: ComponentMap, i: int) -> str:
    """Canonical core key of a unicyclic component.

    The incidence 2-core of an excess-1 component is a single alternating
    cycle, so the core sub-hypergraph is determined up to isomorphism by its
    edge count k (each core edge carries 2 cycle vertices and d-1 private
    ones); cores larger than 12 vertices are bucketed together.
    """
    if comp.kind_of(i) != KIND_UNICYCLIC:
        raise ValueError("core signatures apply to unicyclic components")
    verts = [int(v) for v in comp.vertices_of(i)]
    sub = hypercore.subhypergraph(H, verts)
    _, e_alive = two_core(sub)
    k = int(np.count_nonzero(e_alive))
    if k * H.d > _CORE_VERTEX_LIMIT:
        return LARGE_CORE
    return f"cycle:d={H.d},k={k}"


def unicyclic_core_counts(H: Hypergraph, comp: ComponentMap) -> dict[str, int]:
    out: dict[str, int] = {}
    for i in np.nonzero(comp.excess == 1)[0]:
        sig = core_signature(H, comp, int(i))
        out[sig] = out.get(sig, 0) + 1
    return out


def _cycle_vertices(H: Hypergraph) -> list[int]:
    """Vertices lying on some Berge cycle: incident-graph nodes with a
    non-bridge incidence (iterative bridge search)."""
    n, m = H.n, H.m
    if m == 0:
        return []
    total = n + m
    adj: list[list[int]] = [[] for _ in range(total)]
    for j in range(m):
        node = n + j
        for v in H.edges[j]:
            adj[int(v)].append(node)
            adj[node].append(int(v))
    disc = [-1] * total
    low = [0] * total
    on_cycle = [False] * total
    timer = 0
    for start in range(total):
        if disc[start] != -1:
            continue
        disc[start] = low[start] = timer
        timer += 1
        frames = [(start, -1, iter(adj[start]))]
        while frames:
            u, parent, neighbours = frames[-1]
            moved = False
            for w in neighbours:
                if w == parent:
                    continue
                if disc[w] != -1:
                    if disc[w] < disc[u]:
                        # back edge to an ancestor: its endpoints are on a cycle
                        low[u] = min(low[u], disc[w])
                        on_cycle[u] = on_cycle[w] = True
                    continue
                disc[w] = low[w] = timer
                timer += 1
                frames.append((w, u, iter(adj[w])))
                moved = True
                break
            if not moved:
                frames.pop()
                if parent != -1:
                    low[parent] = min(low[parent], low[u])
                    if low[u] <= disc[parent]:
                        # the tree edge (parent, u) is not a bridge
                        on_cycle[u] = on_cycle[parent] = True
    return [v for v in range(n) if on_cycle[v]]


def small_degree_near_cycle(H: Hypergraph, k: int, radius: int) -> int:
    """Vertices of degree <= k within the given distance of any Berge cycle."""
    if k < 0 or radius < 0:
        raise ValueError("k and radius must be >= 0")
    sources = _cycle_vertices(H)
    if not sources:
        return 0
    deg = H.degree_array()
    dist = {int(v): 0 for v in sources}
    frontier = [int(v) for v in sources]
    for layer in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for e in H.vertex_edges(u):
                for w in H.edges[int(e)]:
                    w = int(w)
                    if w not in dist:
                        dist[w] = layer
                        nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return sum(1 for v in dist if int(deg[v]) <= k)


# ---------------------------------------------------------------------------
# the events D_l and tilde-D_l
# ---------------------------------------------------------------------------


def D_l(H: Hypergraph, l: int, comp: ComponentMap | None = None) -> bool:
    """Complement of some maximal-size component is a disjoint union of
    butterflies of order < l.  D_0 is connectivity; ties over the maximal
    component are resolved existentially."""
    if l < 0:
        raise ValueError("l must be >= 0")
    comp = comp if comp is not None else hypercore.components(H)
    if H.n == 0:
        return True
    if l == 0:
        return comp.is_connected()
    allowed = (comp.excess == 0) & (comp.edge_counts < l)
    bad_total = int(np.count_nonzero(~allowed))
    top = int(comp.sizes.max())
    for i in np.nonzero(comp.sizes == top)[0]:
        if bad_total - (0 if allowed[i] else 1) == 0:
            return True
    return False


def tilde_D_l(H: Hypergraph, l: int, comp: ComponentMap | None = None) -> bool:
    """Elementary approximation: no order-l butterfly component at all, or a
    maximal component is an order-l butterfly and the rest have order < l."""
    if l < 0:
        raise ValueError("l must be >= 0")
    comp = comp if comp is not None else hypercore.components(H)
    if H.n == 0:
        return True
    if l == 0:
        # an order-0 butterfly component is an isolated vertex
        is_l = (comp.excess == 0) & (comp.edge_counts == 0) & (comp.sizes == 1)
        if not is_l.any():
            return True
        top = int(comp.sizes.max())
        return bool(top == 1 and comp.num_components == 1)
    is_l = (comp.excess == 0) & (comp.edge_counts == l)
    if not is_l.any():
        return True
    allowed = (comp.excess == 0) & (comp.edge_counts < l)
    bad_total = int(np.count_nonzero(~allowed))
    top = int(comp.sizes.max())
    # an order-l maximal butterfly is itself the single disallowed component
    return bool(((comp.sizes == top) & is_l).any() and bad_total == 1)


# ---------------------------------------------------------------------------
# the one-shot census
# ---------------------------------------------------------------------------


def census(H: Hypergraph, l_max: int = 3, vstar_max: int = 3, k_small: int = 1) -> CensusReport:
    if l_max < 0 or vstar_max < 0 or k_small < 0:
        raise ValueError("l_max, vstar_max and k_small must be >= 0")
    comp = hypercore.components(H)
    bcounts, btypes = butterfly_component_counts(H, comp, l_max)
    mcounts, mtypes = minimal_marked_copy_counts(H, l_max, vstar_max)
    deg = H.degree_array()
    return CensusReport(
        d=H.d,
        n=H.n,
        edge_count=H.m,
        l_max=l_max,
        vstar_max=vstar_max,
        k_small=k_small,
        connected=comp.is_connected(),
        mu=comp.mu() if H.n else 0,
        component_count=comp.num_components,
        multicyclic_count=int(np.count_nonzero(comp.excess >= 2)),
        min_degree=int(deg.min()) if H.n else None,
        small_degree_count=int(np.count_nonzero(deg <= k_small)) if H.n else 0,
        butterfly_counts=bcounts,
        marked_counts=mcounts,
        unicyclic_by_core=unicyclic_core_counts(H, comp),
        butterfly_types=btypes,
        marked_types=mtypes,
    )
