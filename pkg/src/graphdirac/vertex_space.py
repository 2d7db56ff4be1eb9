"""Vertex spaces: a local orthogonal projection ``P_v`` on ``C^{E_v}`` per vertex.

Coordinates of ``C^{E_v}`` follow the dart order of :class:`graph.Graph`.
All matrices are complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._linalg import fix_phase, haar_frame
from .errors import BadProjection, DimensionMismatch, NotContinuous
from .graph import Dart, Graph

TAU_PROJ = 1e-9

KINDS = (
    "minimal",
    "maximal",
    "standard",
    "oriented_standard",
    "sum",
    "oriented_sum",
    "magnetic",
    "custom",
)

_DUAL_KIND = {
    "standard": "sum",
    "sum": "standard",
    "oriented_standard": "oriented_sum",
    "oriented_sum": "oriented_standard",
    "minimal": "maximal",
    "maximal": "minimal",
}

_ORIENT_KIND = {
    "standard": "oriented_standard",
    "oriented_standard": "standard",
    "sum": "oriented_sum",
    "oriented_sum": "sum",
    "minimal": "minimal",
    "maximal": "maximal",
}


@dataclass(frozen=True, eq=False)
class VertexSpace:
    graph: Graph
    projections: Mapping  # vertex -> (deg v x deg v) complex ndarray
    kind: str = "custom"
    alpha: tuple = field(default=None, compare=False)
    # (operation, source) when built by dual_space, so the involution is exact
    derived_from: tuple = field(default=None, compare=False, repr=False)

    def P(self, v) -> np.ndarray:
        return self.projections[v]

    def dim_at(self, v) -> int:
        return int(round(np.trace(self.projections[v]).real))

    def dims(self) -> dict:
        return {v: self.dim_at(v) for v in self.graph.vertices}

    @property
    def dim(self) -> int:
        return sum(self.dims().values())

    def full_projection(self) -> np.ndarray:
        """Block-diagonal projection on ``G^max`` in global dart coordinates."""
        g = self.graph
        out = np.zeros((g.n_darts, g.n_darts), complex)
        for v in g.vertices:
            s = g.dart_slice(v)
            out[s, s] = self.projections[v]
        return out

    def __repr__(self):
        return f"VertexSpace(kind={self.kind!r}, dim={self.dim}, graph={self.graph!r})"


def validate_projection(p, deg, where="") -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.shape != (deg, deg):
        raise DimensionMismatch(f"{where}: expected {deg}x{deg} matrix, got {p.shape}")
    scale = max(np.linalg.norm(p, 2) if deg else 0.0, 1.0)
    tol = TAU_PROJ * scale
    if deg == 0:
        return p
    if np.linalg.norm(p - p.conj().T, 2) > tol:
        raise BadProjection(f"{where}: matrix is not Hermitian")
    if np.linalg.norm(p @ p - p, 2) > tol:
        raise BadProjection(f"{where}: matrix is not idempotent")
    tr = np.trace(p).real
    if abs(tr - round(tr)) > tol * max(deg, 1):
        raise BadProjection(f"{where}: trace {tr} is not an integer")
    return p


def _magnetic_generator(g: Graph, v, alpha) -> np.ndarray:
    # p_e(v) = exp(-i * oriented alpha_e(v) / 2)
    return np.array(
        [np.exp(-0.5j * d.sign * float(alpha[d.edge])) for d in g.darts_at[v]]
    )


def _rank_one(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj()) / np.vdot(vec, vec).real


def _alpha_seq(g: Graph, alpha):
    if isinstance(alpha, Mapping):
        return tuple(float(alpha.get(e.id, alpha.get(str(e.id), 0.0))) for e in g.edges)
    seq = tuple(float(a) for a in alpha)
    if len(seq) != g.n_edges:
        raise DimensionMismatch(f"alpha has {len(seq)} entries for {g.n_edges} edges")
    return seq


def _lookup(mapping, v):
    if v in mapping:
        return mapping[v]
    if str(v) in mapping:
        return mapping[str(v)]
    raise DimensionMismatch(f"no data supplied for vertex {v!r}")


def make_space(g: Graph, kind: str = "standard", params=None) -> VertexSpace:
    """Construct one of the named vertex spaces on ``g``.

    ``params`` is needed for ``magnetic`` (``{"alpha": ...}``) and ``custom``
    (``{"matrices": {v: P_v}}`` or ``{"bases": {v: [vectors]}}``).
    """
    params = params or {}
    proj = {}
    alpha = None
    if kind == "minimal":
        for v in g.vertices:
            proj[v] = np.zeros((g.deg(v), g.deg(v)), complex)
    elif kind == "maximal":
        for v in g.vertices:
            proj[v] = np.eye(g.deg(v), dtype=complex)
    elif kind == "standard":
        for v in g.vertices:
            n = g.deg(v)
            proj[v] = np.full((n, n), 1.0 / n, dtype=complex)
    elif kind == "oriented_standard":
        for v in g.vertices:
            proj[v] = _rank_one(g.orientation_signs(v))
    elif kind == "sum":
        for v in g.vertices:
            n = g.deg(v)
            proj[v] = np.eye(n, dtype=complex) - np.full((n, n), 1.0 / n)
    elif kind == "oriented_sum":
        for v in g.vertices:
            proj[v] = np.eye(g.deg(v), dtype=complex) - _rank_one(g.orientation_signs(v))
    elif kind == "magnetic":
        if "alpha" not in params:
            raise DimensionMismatch("magnetic space needs an 'alpha' edge potential")
        alpha = _alpha_seq(g, params["alpha"])
        for v in g.vertices:
            proj[v] = _rank_one(_magnetic_generator(g, v, alpha))
    elif kind == "custom":
        if "matrices" in params:
            for v in g.vertices:
                proj[v] = validate_projection(
                    _lookup(params["matrices"], v), g.deg(v), f"vertex {v!r}"
                )
        elif "bases" in params:
            for v in g.vertices:
                vecs = [np.asarray(b, dtype=complex) for b in _lookup(params["bases"], v)]
                n = g.deg(v)
                p = np.zeros((n, n), complex)
                for b in vecs:
                    if b.shape != (n,):
                        raise DimensionMismatch(
                            f"vertex {v!r}: basis vector of length {b.shape} for degree {n}"
                        )
                    p += np.outer(b, b.conj())
                proj[v] = validate_projection(p, n, f"vertex {v!r}")
        else:
            raise DimensionMismatch("custom space needs 'matrices' or 'bases'")
    else:
        raise ValueError(f"unknown vertex space kind {kind!r}")
    return VertexSpace(g, proj, kind, alpha)


def model_space(g: Graph, dims: Mapping) -> VertexSpace:
    """First ``dims[v]`` darts at ``v`` Neumann, the remaining ones Dirichlet."""
    proj = {}
    for v in g.vertices:
        k = int(_lookup(dims, v))
        if not 0 <= k <= g.deg(v):
            raise DimensionMismatch(f"vertex {v!r}: dim {k} outside [0, {g.deg(v)}]")
        p = np.zeros((g.deg(v), g.deg(v)), complex)
        p[:k, :k] = np.eye(k)
        proj[v] = p
    return VertexSpace(g, proj, "custom")


def random_space(g: Graph, dims: Mapping, rng) -> VertexSpace:
    """Haar-random vertex space with prescribed local dimensions."""
    proj = {}
    for v in g.vertices:
        k = int(_lookup(dims, v))
        q = haar_frame(rng, g.deg(v), k)
        proj[v] = q @ q.conj().T
    return VertexSpace(g, proj, "custom")


def space_from_projections(g: Graph, projections: Mapping, kind="custom") -> VertexSpace:
    return VertexSpace(g, {v: np.asarray(projections[v], complex) for v in g.vertices}, kind)


def dual_space(s: VertexSpace) -> VertexSpace:
    if s.derived_from is not None and s.derived_from[0] == "dual":
        return s.derived_from[1]
    g = s.graph
    proj = {v: np.eye(g.deg(v), dtype=complex) - s.projections[v] for v in g.vertices}
    return VertexSpace(g, proj, _DUAL_KIND.get(s.kind, "custom"), derived_from=("dual", s))


def orient_space(s: VertexSpace) -> VertexSpace:
    g = s.graph
    proj = {}
    for v in g.vertices:
        t = g.orientation_signs(v)
        proj[v] = t[:, None] * s.projections[v] * t[None, :]
    return VertexSpace(g, proj, _ORIENT_KIND.get(s.kind, "custom"))


def check_space(s: VertexSpace) -> None:
    """Validate every local projection; raises :class:`BadProjection`."""
    for v in s.graph.vertices:
        validate_projection(s.projections[v], s.graph.deg(v), f"vertex {v!r}")


@dataclass(frozen=True, eq=False)
class InteractionProfile:
    couplings: Mapping  # vertex -> matrix p_{e1,e2}(v)
    blocks: Mapping  # vertex -> tuple of tuples of local dart positions

    def completely_interacting(self, v) -> bool:
        return len(self.blocks[v]) == 1 and bool(
            np.all(np.abs(self.couplings[v]) > _interaction_tol(self.couplings[v]))
        )


def _interaction_tol(p):
    return TAU_PROJ * max(np.linalg.norm(p, 2) if p.size else 0.0, 1.0)


def interaction_profile(s: VertexSpace) -> InteractionProfile:
    """Coupling matrix per vertex and its finest block partition."""
    couplings, blocks = {}, {}
    for v in s.graph.vertices:
        p = s.projections[v]
        n = p.shape[0]
        linked = np.abs(p) > _interaction_tol(p)
        seen = [False] * n
        parts = []
        for start in range(n):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j in range(n):
                    if j != i and not seen[j] and (linked[i, j] or linked[j, i]):
                        seen[j] = True
                        stack.append(j)
            parts.append(tuple(sorted(comp)))
        couplings[v] = p.copy()
        blocks[v] = tuple(parts)
    return InteractionProfile(couplings, blocks)


def continuous_reduction(s: VertexSpace):
    """Generators ``p(v)`` of a continuous vertex space.

    Returns ``(p, weights_ok)`` where ``p`` maps ``(v, dart)`` to the
    coefficient ``p_e(v)``. Each generator is scaled to ``|p(v)|^2 = deg v``
    with its first coordinate real positive.
    """
    g = s.graph
    prof = interaction_profile(s)
    out = {}
    ok = True
    for v in g.vertices:
        p = s.projections[v]
        if s.dim_at(v) != 1:
            raise NotContinuous(f"vertex {v!r}: dim G_v = {s.dim_at(v)}")
        w, vecs = np.linalg.eigh(p)
        vec = fix_phase(vecs[:, [-1]])[:, 0]
        if np.any(np.abs(vec) <= TAU_PROJ) or len(prof.blocks[v]) != 1:
            raise NotContinuous(f"vertex {v!r}: vanishing coefficient")
        vec = vec * np.sqrt(g.deg(v)) / np.linalg.norm(vec)
        ok &= abs(np.vdot(vec, vec).real - g.deg(v)) <= 1e-12 * g.deg(v)
        for d, c in zip(g.darts_at[v], vec):
            out[(v, d)] = complex(c)
    return out, bool(ok)


def generator_from_space(s: VertexSpace):
    return continuous_reduction(s)[0]


def reduced_operators(g: Graph, p: Mapping):
    """Exterior derivative of a continuous space transported to ``l2(V)``.

    ``p`` maps ``(v, dart)`` to generator coefficients with ``|p(v)|^2 =
    deg v``. Returns ``(d, d_star, lap0)`` where ``l2(V)`` carries the weight
    ``deg v`` and ``l2(E)`` the weight ``1/l_e``.
    """
    n, m = g.n_vertices, g.n_edges
    d = np.zeros((m, n), complex)
    for e in g.edges:
        for sign in (-1, +1):
            v = e.endpoint(sign)
            d[e.id, g.vertex_index(v)] += sign * p[(v, Dart(e.id, sign))]
    w_v = np.array([g.deg(v) for v in g.vertices], float)
    w_e = 1.0 / g.lengths()
    d_star = (d.conj().T * w_e[None, :]) / w_v[:, None]
    return d, d_star, d_star @ d


def classify_permutation_invariance(g: Graph, v, P) -> str:
    """Which of the four permutation-invariant local spaces ``P`` is, if any."""
    P = np.asarray(P, dtype=complex)
    n = g.deg(v)
    tol = TAU_PROJ * max(np.linalg.norm(P, 2) if n else 0.0, 1.0)
    for i in range(n - 1):
        perm = np.arange(n)
        perm[[i, i + 1]] = perm[[i + 1, i]]
        if np.linalg.norm(P[np.ix_(perm, perm)] - P, 2) > tol:
            return "none"
    eye = np.eye(n)
    ones = np.full((n, n), 1.0 / n)
    for name, ref in (
        ("maximal", eye),
        ("minimal", np.zeros((n, n))),
        ("standard", ones),
        ("sum", eye - ones),
    ):
        if np.linalg.norm(P - ref, 2) <= tol:
            return name
    return "none"
