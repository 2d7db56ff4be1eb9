"""Finite oriented multigraphs with edge lengths, stored through darts.

A dart is an (edge, endpoint) incidence. The darts at a vertex ``v`` form the
coordinate system of ``C^{E_v}``; a self-loop therefore contributes two darts
at its vertex. Darts at a vertex are ordered by edge id, with the initial
(sign -1) dart before the terminal (sign +1) dart of a self-loop. That order
is public: projection matrices in problem files are written in it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import (
    IsolatedEdge,
    IsolatedVertex,
    MultiEdgePresent,
    NonPositiveLength,
    SelfLoopPresent,
    UnknownEdge,
    UnknownVertex,
)


@dataclass(frozen=True, order=True)
class Dart:
    edge: int
    sign: int  # -1 at the initial vertex, +1 at the terminal vertex


@dataclass(frozen=True)
class EdgeRecord:
    id: int
    src: Hashable
    dst: Hashable
    length: float = 1.0
    exact_length: Fraction = field(default=Fraction(1), compare=False, repr=False)

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst

    def endpoint(self, sign: int):
        return self.dst if sign > 0 else self.src


@dataclass(frozen=True)
class CycleBasis:
    spanning_forest: frozenset
    prime_cycles: tuple  # tuple of tuples of (edge id, traversal sign)
    component_count: int
    bipartite_components: int
    components: tuple = ()  # vertex tuples, one per component


def _exact(length) -> Fraction:
    if isinstance(length, (Rational, Fraction)):
        return Fraction(length)
    if isinstance(length, str):
        return Fraction(length)
    return Fraction(float(length))


class Graph:
    """Immutable finite multigraph ``(V, E, boundary, length)``."""

    def __init__(self, vertices, edges, darts_at):
        self._vertices = tuple(vertices)
        self._edges = tuple(edges)
        self._darts_at = {v: tuple(ds) for v, ds in darts_at.items()}
        self._index = {v: i for i, v in enumerate(self._vertices)}
        offsets, pos = {}, 0
        for v in self._vertices:
            offsets[v] = pos
            pos += len(self._darts_at[v])
        self._offsets = offsets
        self._dart_index = {}
        for v in self._vertices:
            for k, dart in enumerate(self._darts_at[v]):
                self._dart_index[dart] = offsets[v] + k

    # basic data
    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def edges(self) -> tuple:
        return self._edges

    @property
    def darts_at(self) -> Mapping:
        return self._darts_at

    @property
    def n_vertices(self) -> int:
        return len(self._vertices)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def n_darts(self) -> int:
        return 2 * len(self._edges)

    def deg(self, v) -> int:
        if v not in self._darts_at:
            raise UnknownVertex(v)
        return len(self._darts_at[v])

    def deg_in(self, v) -> int:
        return sum(1 for d in self._darts_at[v] if d.sign > 0)

    def deg_out(self, v) -> int:
        return sum(1 for d in self._darts_at[v] if d.sign < 0)

    def edge(self, e: int) -> EdgeRecord:
        try:
            return self._edges[e]
        except (IndexError, TypeError):
            raise UnknownEdge(e) from None

    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self._edges], dtype=float)

    def vertex_index(self, v) -> int:
        return self._index[v]

    # global dart coordinates of G^max = (+)_v C^{E_v}
    def dart_offset(self, v) -> int:
        return self._offsets[v]

    def dart_index(self, dart: Dart) -> int:
        return self._dart_index[dart]

    def dart_slice(self, v) -> slice:
        o = self._offsets[v]
        return slice(o, o + len(self._darts_at[v]))

    def orientation_signs(self, v) -> np.ndarray:
        """Vector of oriented evaluation factors at ``v`` in dart order."""
        return np.array([d.sign for d in self._darts_at[v]], dtype=float)

    def tau(self) -> np.ndarray:
        """Orientation map as a diagonal matrix on ``G^max``."""
        return np.diag(np.concatenate([self.orientation_signs(v) for v in self._vertices]))

    def d_max(self) -> np.ndarray:
        """Exterior derivative on the maximal vertex space, ``|E| x 2|E|``."""
        d = np.zeros((self.n_edges, self.n_darts))
        for e in self._edges:
            d[e.id, self._dart_index[Dart(e.id, +1)]] = 1.0
            d[e.id, self._dart_index[Dart(e.id, -1)]] = -1.0
        return d

    def trace_map(self, oriented: bool = False) -> np.ndarray:
        """Map edgewise constants ``c`` to their (oriented) vertex evaluation."""
        t = np.zeros((self.n_darts, self.n_edges))
        for e in self._edges:
            for s in (-1, +1):
                t[self._dart_index[Dart(e.id, s)], e.id] = s if oriented else 1.0
        return t

    def has_self_loops(self) -> bool:
        return any(e.is_loop for e in self._edges)

    def has_multi_edges(self) -> bool:
        seen = set()
        for e in self._edges:
            key = frozenset((e.src, e.dst))
            if key in seen:
                return True
            seen.add(key)
        return False

    def is_regular(self):
        """Return the common degree, or ``None`` if degrees differ."""
        degs = {self.deg(v) for v in self._vertices}
        return degs.pop() if len(degs) == 1 else None

    def neighbours(self, v):
        out = []
        for d in self._darts_at[v]:
            e = self._edges[d.edge]
            out.append((e.endpoint(-d.sign), d))
        return out

    def __repr__(self):
        return f"Graph(|V|={self.n_vertices}, |E|={self.n_edges})"

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self):
        return hash((self._vertices, self._edges))


def build_graph(vertex_ids: Sequence, edge_specs: Sequence) -> Graph:
    """Build a graph from vertex ids and ``(src, dst[, length])`` tuples.

    Edge ids are the positions in ``edge_specs``; missing lengths default to 1.
    """
    vertices = list(vertex_ids)
    if len(set(vertices)) != len(vertices):
        raise ValueError("vertex ids must be distinct")
    known = set(vertices)
    edges = []
    darts_at = {v: [] for v in vertices}
    for k, spec in enumerate(edge_specs):
        src, dst = spec[0], spec[1]
        length = spec[2] if len(spec) > 2 and spec[2] is not None else 1
        for v in (src, dst):
            if v not in known:
                raise UnknownVertex(v)
        try:
            exact = _exact(length)
        except (OverflowError, ValueError, ZeroDivisionError):
            raise NonPositiveLength(f"edge {k}: length {length!r}") from None
        value = float(exact) if not isinstance(length, float) else length
        if not (np.isfinite(value) and value > 0):
            raise NonPositiveLength(f"edge {k}: length {length!r}")
        edges.append(EdgeRecord(k, src, dst, value, exact))
        darts_at[src].append(Dart(k, -1))
        darts_at[dst].append(Dart(k, +1))
    for v in vertices:
        if not darts_at[v]:
            raise IsolatedVertex(v)
        darts_at[v].sort()
    return Graph(vertices, edges, darts_at)


def _require_simple(g: Graph):
    if g.has_self_loops():
        raise SelfLoopPresent("graph has a self-loop")
    if g.has_multi_edges():
        raise MultiEdgePresent("graph has multiple edges")


def line_graph(g: Graph) -> Graph:
    """Line graph: one vertex per edge, edges join edges sharing a vertex.

    New edges are oriented from the lower to the higher edge id and have
    length 1.
    """
    _require_simple(g)
    for e in g.edges:
        if g.deg(e.src) == 1 and g.deg(e.dst) == 1:
            raise IsolatedEdge(f"edge {e.id} is isolated")
    pairs = set()
    for v in g.vertices:
        ids = sorted(d.edge for d in g.darts_at[v])
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pairs.add((a, b))
    return build_graph([e.id for e in g.edges], [(a, b, 1) for a, b in sorted(pairs)])


def subdivision_graph(g: Graph) -> Graph:
    """Insert a new vertex on every edge.

    Vertex ids are ``("v", v)`` for old vertices and ``("e", k)`` for the
    midpoint of edge ``k``; all lengths are 1.
    """
    _require_simple(g)
    verts = [("v", v) for v in g.vertices] + [("e", e.id) for e in g.edges]
    specs = []
    for e in g.edges:
        specs.append((("v", e.src), ("e", e.id), 1))
        specs.append((("e", e.id), ("v", e.dst), 1))
    return build_graph(verts, specs)


def cycle_structure(g: Graph) -> CycleBasis:
    """Spanning forest by BFS and the prime cycle of every non-forest edge."""
    parent = {}  # vertex -> (parent vertex, edge id, sign of traversal parent->vertex)
    depth = {}
    comp_of = {}
    components = []
    forest = set()
    for root in g.vertices:
        if root in depth:
            continue
        depth[root] = 0
        parent[root] = None
        comp = [root]
        comp_of[root] = len(components)
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w, dart in g.neighbours(u):
                if w in depth:
                    continue
                # traversal u -> w follows the edge direction iff u is its source
                depth[w] = depth[u] + 1
                parent[w] = (u, dart.edge, -dart.sign)
                comp_of[w] = comp_of[root]
                forest.add(dart.edge)
                comp.append(w)
                queue.append(w)
        components.append(tuple(comp))

    def path_up(u, stop):
        # signed edges walking from u up to ancestor ``stop``
        steps = []
        while u != stop:
            p, e, s = parent[u]
            steps.append((e, -s))
            u = p
        return steps

    def lca(a, b):
        while depth[a] > depth[b]:
            a = parent[a][0]
        while depth[b] > depth[a]:
            b = parent[b][0]
        while a != b:
            a, b = parent[a][0], parent[b][0]
        return a

    cycles = []
    odd_components = set()
    for e in g.edges:
        if e.id in forest:
            continue
        # traverse e from src to dst, then return along the tree from dst to src
        top = lca(e.dst, e.src)
        back = path_up(e.dst, top)
        down = [(edge, -s) for edge, s in reversed(path_up(e.src, top))]
        cyc = tuple([(e.id, +1)] + back + down)
        cycles.append(cyc)
        if len(cyc) % 2:
            odd_components.add(comp_of[e.src])
    return CycleBasis(
        spanning_forest=frozenset(forest),
        prime_cycles=tuple(cycles),
        component_count=len(components),
        bipartite_components=len(components) - len(odd_components),
        components=tuple(components),
    )


def flux(g: Graph, alpha, cycle) -> float:
    """Signed sum of the edge potential ``alpha`` along ``cycle``."""
    total = 0.0
    for e, sign in cycle:
        g.edge(e)
        total += sign * float(alpha[e])
    return total


def reverse_cycle(cycle):
    return tuple((e, -s) for e, s in reversed(cycle))
