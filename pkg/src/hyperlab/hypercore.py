"""Finite (d+1)-uniform hypergraphs: validation, components, Berge-cycle structure.

Vertices are dense integer ids 0..n-1.  Edges are (d+1)-subsets stored as the
rows of an immutable integer array, in strictly increasing colexicographic
order (compare the largest element first).  d=1 is the ordinary-graph case.

Conventions: the empty hypergraph (n=0) counts as connected; distances are
measured in the shortest edge-path metric (vertices sharing an edge are at
distance 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "EdgeError",
    "FormatError",
    "Hypergraph",
    "ComponentSummary",
    "ComponentMap",
    "build",
    "components",
    "is_connected",
    "mu",
    "berge_acyclic",
    "degree",
    "degrees",
    "ball",
    "ball_distances",
    "max_ball_size",
    "subhypergraph",
    "read_edgelist",
    "write_edgelist",
]

KIND_ISOLATED = "isolated-vertex"
KIND_BUTTERFLY = "butterfly"
KIND_UNICYCLIC = "unicyclic"
KIND_MULTICYCLIC = "multicyclic"


class EdgeError(ValueError):
    """An edge list violates the (d+1)-uniform contract."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        self.reason = message
        super().__init__(message if index is None else f"edge {index}: {message}")


class FormatError(ValueError):
    """Malformed edge-list text; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class Hypergraph:
    """Immutable (d+1)-uniform hypergraph.  Construct through :func:`build`."""

    __slots__ = ("_d", "_n", "_edges", "_inc", "_deg")

    def __init__(self, d: int, n: int, edge_array: np.ndarray):
        # Trusted constructor: edge_array must already be validated and in
        # canonical colex order.  Use build() for untrusted input.
        self._d = int(d)
        self._n = int(n)
        arr = np.asarray(edge_array, dtype=np.int64).reshape(-1, d + 1)
        arr.setflags(write=False)
        self._edges = arr
        self._inc = None
        self._deg = None

    @property
    def d(self) -> int:
        return self._d

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return self._edges.shape[0]

    @property
    def edges(self) -> np.ndarray:
        """Read-only (m, d+1) array; row i is the i-th edge in colex order."""
        return self._edges

    def edge(self, i: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self._edges[i])

    def as_edge_list(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self._edges]

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.as_edge_list())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self._d == other._d
            and self._n == other._n
            and self._edges.shape == other._edges.shape
            and bool(np.array_equal(self._edges, other._edges))
        )

    def __hash__(self) -> int:
        return hash((self._d, self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Hypergraph(d={self._d}, n={self._n}, m={self.m})"

    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, edge_ids): edge ids containing vertex v are
        edge_ids[indptr[v]:indptr[v+1]].  Cached after first use."""
        if self._inc is None:
            flat = self._edges.ravel()
            order = np.argsort(flat, kind="stable")
            sorted_v = flat[order]
            edge_ids = (order // (self._d + 1)).astype(np.int64)
            indptr = np.searchsorted(sorted_v, np.arange(self._n + 1))
            self._inc = (indptr, edge_ids)
        return self._inc

    def vertex_edges(self, v: int) -> np.ndarray:
        indptr, edge_ids = self.incidence()
        return edge_ids[indptr[v] : indptr[v + 1]]

    def degree_array(self) -> np.ndarray:
        if self._deg is None:
            deg = np.bincount(self._edges.ravel(), minlength=self._n)
            deg.setflags(write=False)
            self._deg = deg
        return self._deg


def _colex_order(arr: np.ndarray) -> np.ndarray:
    # np.lexsort uses the last key as primary: pass columns low-to-high so the
    # largest element of each edge decides first.
    return np.lexsort(tuple(arr[:, j] for j in range(arr.shape[1])))


def build(d: int, n: int, edges: Iterable[Sequence[int]]) -> Hypergraph:
    """Validate and canonicalize an edge list into a Hypergraph.

    Raises EdgeError (with the offending input index) for wrong arity,
    repeated vertices inside an edge, out-of-range vertices, or duplicates.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    rows: list[list[int]] = []
    for i, e in enumerate(edges):
        t = sorted(int(v) for v in e)
        if len(t) != d + 1:
            raise EdgeError(f"expected {d + 1} vertices, got {len(t)}", i)
        for a, b in zip(t, t[1:]):
            if a == b:
                raise EdgeError(f"repeated vertex {a}", i)
        if t[0] < 0 or t[-1] >= n:
            bad = t[0] if t[0] < 0 else t[-1]
            raise EdgeError(f"vertex {bad} out of range [0, {n})", i)
        rows.append(t)
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), d + 1)
    if len(rows) > 1:
        order = _colex_order(arr)
        arr = arr[order]
        dup = np.nonzero((np.diff(arr, axis=0) == 0).all(axis=1))[0]
        if dup.size:
            j = int(dup[0])
            # report the later of the two colliding input positions
            raise EdgeError(
                f"duplicate edge {tuple(int(v) for v in arr[j])}",
                int(max(order[j], order[j + 1])),
            )
    return Hypergraph(d, n, arr)


@dataclass(frozen=True)
class ComponentSummary:
    """Shape summary of one connected component."""

    vertex_count: int
    edge_count: int
    excess: int
    kind: str
    order: int | None = None
    type_code: bytes | None = None
    core_signature: str | None = None


class ComponentMap:
    """Partition of the vertices into connected components.

    Vertex labels are materialized; per-component vertex/edge listings are
    grouped lazily.  Classification: excess = E*d - V + 1 per component
    (0 = Berge-acyclic, 1 = unicyclic, >=2 = multicyclic); the equivalence
    with the incidence-forest definition is exercised by the test oracles.
    """

    def __init__(self, H: Hypergraph, vlabels: np.ndarray, elabels: np.ndarray, num: int):
        self.H = H
        self.n = H.n
        self.d = H.d
        self.num_components = int(num)
        self.vertex_labels = vlabels
        self.edge_labels = elabels
        self.sizes = np.bincount(vlabels, minlength=num) if H.n else np.zeros(0, dtype=np.int64)
        self.edge_counts = (
            np.bincount(elabels, minlength=num) if H.m else np.zeros(num, dtype=np.int64)
        )
        self.excess = self.edge_counts * H.d - self.sizes + 1
        self._vorder: np.ndarray | None = None
        self._vstarts: np.ndarray | None = None
        self._eorder: np.ndarray | None = None
        self._estarts: np.ndarray | None = None

    def component_of(self, v: int) -> int:
        return int(self.vertex_labels[v])

    def _vertex_groups(self) -> tuple[np.ndarray, np.ndarray]:
        if self._vorder is None:
            self._vorder = np.argsort(self.vertex_labels, kind="stable")
            self._vstarts = np.searchsorted(
                self.vertex_labels[self._vorder], np.arange(self.num_components + 1)
            )
        return self._vorder, self._vstarts

    def _edge_groups(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eorder is None:
            self._eorder = np.argsort(self.edge_labels, kind="stable")
            self._estarts = np.searchsorted(
                self.edge_labels[self._eorder], np.arange(self.num_components + 1)
            )
        return self._eorder, self._estarts

    def vertices_of(self, i: int) -> np.ndarray:
        order, starts = self._vertex_groups()
        return order[starts[i] : starts[i + 1]]

    def edge_indices_of(self, i: int) -> np.ndarray:
        order, starts = self._edge_groups()
        return order[starts[i] : starts[i + 1]]

    def kind_of(self, i: int) -> str:
        exc = int(self.excess[i])
        if exc == 0:
            return KIND_ISOLATED if int(self.edge_counts[i]) == 0 else KIND_BUTTERFLY
        return KIND_UNICYCLIC if exc == 1 else KIND_MULTICYCLIC

    def summary(self, i: int, include_codes: bool = False) -> ComponentSummary:
        kind = self.kind_of(i)
        order = int(self.edge_counts[i]) if kind in (KIND_ISOLATED, KIND_BUTTERFLY) else None
        code = None
        core_sig = None
        if include_codes:
            if kind in (KIND_ISOLATED, KIND_BUTTERFLY):
                from . import butterfly as _butterfly  # deferred: avoids an import cycle

                edges = [self.H.edge(int(j)) for j in self.edge_indices_of(i)]
                verts = [int(v) for v in self.vertices_of(i)]
                code = _butterfly.type_from_edges(self.d, edges, verts).code
            elif kind == KIND_UNICYCLIC:
                from . import census as _census

                core_sig = _census.core_signature(self.H, self, i)
        return ComponentSummary(
            vertex_count=int(self.sizes[i]),
            edge_count=int(self.edge_counts[i]),
            excess=int(self.excess[i]),
            kind=kind,
            order=order,
            type_code=code,
            core_signature=core_sig,
        )

    def summaries(self, include_codes: bool = False) -> list[ComponentSummary]:
        return [self.summary(i, include_codes) for i in range(self.num_components)]

    def max_component_index(self) -> int:
        """A maximal-size component; ties broken by smallest minimum vertex id."""
        if self.num_components == 0:
            raise ValueError("empty hypergraph has no components")
        top = int(self.sizes.max())
        candidates = np.nonzero(self.sizes == top)[0]
        if candidates.size == 1:
            return int(candidates[0])
        minvert = np.full(self.num_components, self.n, dtype=np.int64)
        np.minimum.at(minvert, self.vertex_labels, np.arange(self.n))
        return int(candidates[np.argmin(minvert[candidates])])

    def mu(self) -> int:
        if self.n < 1:
            raise ValueError("mu is undefined for n = 0")
        return int(self.n - self.sizes.max())

    def is_connected(self) -> bool:
        return self.num_components <= 1


def components(H: Hypergraph) -> ComponentMap:
    """Connected components under shared-vertex reachability."""
    n, m, d = H.n, H.m, H.d
    if n == 0:
        return ComponentMap(H, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), 0)
    if m == 0:
        return ComponentMap(H, np.arange(n, dtype=np.int64), np.zeros(0, dtype=np.int64), n)
    E = H.edges
    if d == 1:
        g = sparse.coo_matrix(
            (np.ones(m, dtype=np.int8), (E[:, 0], E[:, 1])), shape=(n, n)
        )
        num, vlabels = csgraph.connected_components(g, directed=False)
        elabels = vlabels[E[:, 0]]
    else:
        # bipartite incidence graph on n vertex nodes + m edge nodes
        rows = E.ravel()
        cols = n + np.repeat(np.arange(m, dtype=np.int64), d + 1)
        g = sparse.coo_matrix(
            (np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=(n + m, n + m)
        )
        num, labels = csgraph.connected_components(g, directed=False)
        # every component contains a vertex node (edge nodes are never
        # isolated), so the label range is already dense over vertices
        vlabels = labels[:n]
        elabels = labels[n:]
    return ComponentMap(H, vlabels.astype(np.int64), elabels.astype(np.int64), int(num))


def is_connected(H: Hypergraph) -> bool:
    """True when H has at most one component (n=0 counts as connected)."""
    return components(H).is_connected()


def mu(H: Hypergraph) -> int:
    """Number of vertices outside a largest connected component."""
    return components(H).mu()


def berge_acyclic(H: Hypergraph) -> bool:
    """Forest check on the incidence bipartite graph (independent of excess)."""
    parent = list(range(H.n + H.m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in range(H.m):
        ej = H.n + j
        for v in H.edges[j]:
            rv, re = find(int(v)), find(ej)
            if rv == re:
                return False
            parent[rv] = re
    return True


def degree(H: Hypergraph, v: int) -> int:
    """Number of edges containing v."""
    if not 0 <= v < H.n:
        raise ValueError(f"vertex {v} out of range [0, {H.n})")
    return int(H.degree_array()[v])


def degrees(H: Hypergraph) -> np.ndarray:
    return H.degree_array()


def ball_distances(H: Hypergraph, v: int, r: int) -> dict[int, int]:
    """Vertices at edge-path distance <= r from v, with their distances."""
    if not 0 <= v < H.n:
        raise ValueError(f"vertex {v} out of range [0, {H.n})")
    if r < 0:
        raise ValueError("radius must be >= 0")
    dist = {v: 0}
    frontier = [v]
    seen_edges: set[int] = set()
    for layer in range(1, r + 1):
        nxt: list[int] = []
        for u in frontier:
            for e in H.vertex_edges(u):
                e = int(e)
                if e in seen_edges:
                    continue
                seen_edges.add(e)
                for w in H.edges[e]:
                    w = int(w)
                    if w not in dist:
                        dist[w] = layer
                        nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return dist


def ball(H: Hypergraph, v: int, r: int) -> np.ndarray:
    """Sorted vertex ids of the ball B(v, r)."""
    return np.array(sorted(ball_distances(H, v, r)), dtype=np.int64)


def max_ball_size(H: Hypergraph, r: int) -> int:
    """max_v |B(v, r)|; scans every vertex, so cost is O(n * ball work)."""
    if H.n == 0:
        return 0
    return max(len(ball_distances(H, v, r)) for v in range(H.n))


def subhypergraph(H: Hypergraph, vertices: Iterable[int]) -> Hypergraph:
    """Restriction to a vertex set: keeps edges entirely inside it.

    Vertices are relabelled densely by their sorted order.
    """
    verts = np.unique(np.asarray(list(vertices), dtype=np.int64))
    if verts.size and (verts[0] < 0 or verts[-1] >= H.n):
        raise ValueError("vertex out of range")
    if H.m == 0:
        return Hypergraph(H.d, verts.size, np.zeros((0, H.d + 1), dtype=np.int64))
    inside = np.isin(H.edges, verts).all(axis=1)
    sub = np.searchsorted(verts, H.edges[inside])
    return Hypergraph(H.d, verts.size, sub)


# ---------------------------------------------------------------------------
# Edge-list text format: header "d n m", then m lines of d+1 vertex ids.
# Lines whose first non-blank character is '#' are comments; blank lines are
# skipped.  write_edgelist emits the canonical colex order, so
# write(read(x)) is the canonical form of x.
# ---------------------------------------------------------------------------


def read_edgelist(stream: IO[str]) -> Hypergraph:
    lines = stream.readlines() if hasattr(stream, "readlines") else list(stream)

    def content(idx: int) -> bool:
        s = lines[idx].strip()
        return bool(s) and not s.startswith("#")

    useful = [i for i in range(len(lines)) if content(i)]
    if not useful:
        raise FormatError("missing header 'd n m'", 1)
    head_idx = useful[0]
    head = lines[head_idx].split()
    if len(head) != 3:
        raise FormatError("header must be 'd n m'", head_idx + 1)
    try:
        d, n, m = (int(x) for x in head)
    except ValueError:
        raise FormatError("header must contain three integers", head_idx + 1) from None
    if d < 1 or n < 0 or m < 0:
        raise FormatError("header values out of range", head_idx + 1)
    body = useful[1:]
    if len(body) < m:
        raise FormatError(f"expected {m} edge lines, found {len(body)}", len(lines))
    if len(body) > m:
        raise FormatError("trailing data after edge list", body[m] + 1)
    rows: list[list[int]] = []
    for k, idx in enumerate(body):
        toks = lines[idx].split()
        if len(toks) != d + 1:
            raise FormatError(f"expected {d + 1} vertex ids, got {len(toks)}", idx + 1)
        try:
            rows.append([int(t) for t in toks])
        except ValueError:
            raise FormatError("vertex ids must be integers", idx + 1) from None
    try:
        return build(d, n, rows)
    except EdgeError as exc:
        line = body[exc.index] + 1 if exc.index is not None else head_idx + 1
        raise FormatError(str(exc), line) from exc


def write_edgelist(H: Hypergraph, stream: IO[str]) -> None:
    stream.write(f"{H.d} {H.n} {H.m}\n")
    for row in H.edges:
        stream.write(" ".join(str(int(v)) for v in row) + "\n")
