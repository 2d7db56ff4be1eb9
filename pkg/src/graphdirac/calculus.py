"""Discrete exterior derivative, Dirac operator and Laplacians of a vertex space.

0-forms live in ``G`` with coordinates taken in an orthonormal basis of each
``G_v``; 1-forms are raw edge values ``eta_e`` with the weighted inner
product ``<eta, xi> = sum_e conj(eta_e) xi_e / l_e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _linalg as la
from .errors import IsoFailed
from .graph import Dart, Graph, cycle_structure, flux
from .vertex_space import (
    VertexSpace,
    check_space,
    dual_space,
    model_space,
    orient_space,
    random_space,
)

SUSY_TOL = 1e-9


def local_basis(P) -> np.ndarray:
    """Orthonormal basis (columns) of the range of a local projection."""
    P = np.asarray(P, complex)
    if P.shape[0] == 0:
        return np.zeros((0, 0), complex)
    w, vecs = np.linalg.eigh((P + P.conj().T) / 2)
    return la.fix_phase(vecs[:, w >= 0.5])


def space_basis(s: VertexSpace) -> np.ndarray:
    """Block-diagonal ``2|E| x dim G`` matrix of the local bases."""
    g = s.graph
    blocks = [local_basis(s.projections[v]) for v in g.vertices]
    out = np.zeros((g.n_darts, sum(b.shape[1] for b in blocks)), complex)
    col = 0
    for v, b in zip(g.vertices, blocks):
        out[g.dart_slice(v), col:col + b.shape[1]] = b
        col += b.shape[1]
    return out


@dataclass(frozen=True, eq=False)
class OperatorSet:
    graph: Graph
    space: VertexSpace
    basis: np.ndarray  # 2|E| x dim G, columns span G inside G^max
    d: np.ndarray  # |E| x dim G
    edge_weight: np.ndarray  # 1 / l_e
    d_star: np.ndarray  # dim G x |E|
    lap0: np.ndarray
    lap1: np.ndarray
    basis_dims: tuple = ()  # (vertex, dim G_v) in vertex order

    @property
    def dim(self) -> int:
        return self.d.shape[1]

    @property
    def natural_scale(self) -> float:
        """Size of ``weighted_d`` for a unit-size ``d``; anchors rank cut-offs."""
        return float(np.sqrt(self.edge_weight.max())) if self.edge_weight.size else 1.0

    @property
    def weighted_d(self) -> np.ndarray:
        """``d`` in orthonormal coordinates of both form spaces."""
        return np.sqrt(self.edge_weight)[:, None] * self.d

    def dirac(self) -> np.ndarray:
        n, m = self.dim, self.d.shape[0]
        out = np.zeros((n + m, n + m), complex)
        out[:n, n:] = self.d_star
        out[n:, :n] = self.d
        return out

    def lap1_symmetric(self) -> np.ndarray:
        """``lap1`` conjugated to orthonormal edge coordinates."""
        s = np.sqrt(self.edge_weight)
        a = s[:, None] * self.lap1 / s[None, :]
        return (a + a.conj().T) / 2


def assemble(g: Graph, s: VertexSpace, validate: bool = True) -> OperatorSet:
    if validate:
        check_space(s)
    basis = space_basis(s)
    d = g.d_max() @ basis
    w = 1.0 / g.lengths()
    d_star = d.conj().T * w[None, :]
    dims = tuple((v, int(local_basis(s.projections[v]).shape[1])) for v in g.vertices)
    return OperatorSet(g, s, basis, d, w, d_star, d_star @ d, d @ d_star, dims)


def kappa(g: Graph, s: VertexSpace) -> float:
    """``max_v |P_v [1/l]_v|`` (spectral norm)."""
    w = 1.0 / g.lengths()
    best = 0.0
    for v in g.vertices:
        inv_len = np.array([w[dt.edge] for dt in g.darts_at[v]])
        best = max(best, np.linalg.norm(s.projections[v] * inv_len[None, :], 2))
    return float(best)


def operator_norm(ops: OperatorSet) -> float:
    wd = ops.weighted_d
    if wd.size == 0:
        return 0.0
    return float(np.linalg.svd(wd, compute_uv=False)[0])


def norm_bound_check(ops: OperatorSet, rel=1e-9) -> dict:
    sigma = operator_norm(ops)
    bound = np.sqrt(2 * kappa(ops.graph, ops.space))
    return {"sigma_max": sigma, "bound": float(bound), "pass": bool(sigma <= bound * (1 + rel))}


def adjointness_residual(ops: OperatorSet, rng, samples: int = 4) -> float:
    """Largest relative defect of ``<dF, eta>_w = <F, d* eta>`` on random vectors."""
    n, m = ops.dim, ops.d.shape[0]
    worst = 0.0
    for _ in range(samples):
        F = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        eta = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        lhs = np.vdot(ops.d @ F, ops.edge_weight * eta)
        rhs = np.vdot(F, ops.d_star @ eta)
        scale = max(np.linalg.norm(ops.weighted_d, 2) if ops.d.size else 0.0, 1.0)
        scale *= np.linalg.norm(F) * np.linalg.norm(np.sqrt(ops.edge_weight) * eta)
        worst = max(worst, abs(lhs - rhs) / max(scale, 1e-300))
    return float(worst)


def curvature(s: VertexSpace) -> dict:
    g = s.graph
    return {v: Fraction(s.dim_at(v)) - Fraction(g.deg(v), 2) for v in g.vertices}


def _check(name, expected, got, passed=None):
    if passed is None:
        passed = expected == got
    return {"name": name, "expected": expected, "got": got, "pass": bool(passed)}


@dataclass(frozen=True, eq=False)
class CohomologyReport:
    b0: int
    b1: int
    index: int
    dimG: int
    n_edges: int
    ker0_basis: np.ndarray
    ker1_basis: np.ndarray  # raw 1-form coordinates, orthonormal for the weighted product
    curvature: dict
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)


def cohomology(ops: OperatorSet, tau: float = la.TAU_RANK) -> CohomologyReport:
    """Betti numbers, index and the index/Gauss-Bonnet checks."""
    wd = ops.weighted_d
    n, m = ops.dim, ops.d.shape[0]
    scale = ops.natural_scale
    r = la.numerical_rank(wd, tau, scale=scale) if wd.size else 0
    b0, b1 = n - r, m - r
    ker0 = la.null_space(wd, tau, scale=scale) if n else np.zeros((0, 0), complex)
    ker1_xi = la.null_space(wd.conj().T, tau, scale=scale) if m else np.zeros((0, 0), complex)
    ker1 = ker1_xi / np.sqrt(ops.edge_weight)[:, None] if m else ker1_xi
    curv = curvature(ops.space)
    index = b0 - b1
    checks = [
        _check("index_theorem", n - m, index),
        _check("gauss_bonnet", str(sum(curv.values(), Fraction(0))), str(Fraction(index))),
    ]
    return CohomologyReport(b0, b1, index, n, m, ker0, ker1, curv, checks)


def magnetic_cohomology_predict(g: Graph, alpha, tol: float = 1e-9):
    """Betti numbers of the magnetic space predicted from prime-cycle fluxes."""
    cb = cycle_structure(g)
    if not isinstance(alpha, dict):
        alpha = {e.id: a for e, a in zip(g.edges, alpha)}
    comp_of = {v: k for k, comp in enumerate(cb.components) for v in comp}
    trivial = [True] * cb.component_count
    for cyc in cb.prime_cycles:
        phi = flux(g, alpha, cyc) / (2 * np.pi)
        if abs(phi - round(phi)) > tol:
            trivial[comp_of[g.edge(cyc[0][0]).src]] = False
    b0 = sum(trivial)
    return b0, b0 + g.n_edges - g.n_vertices


@dataclass(frozen=True)
class HodgeReport:
    ker_d: int
    ran_d_star: int
    ker_d_star: int
    ran_d: int
    dimG: int
    n_edges: int
    residual0: float
    residual1: float

    @property
    def passed(self) -> bool:
        return (
            self.ker_d + self.ran_d_star == self.dimG
            and self.ker_d_star + self.ran_d == self.n_edges
            and self.residual0 <= 1e-10
            and self.residual1 <= 1e-10
        )


def hodge(ops: OperatorSet, tau: float = la.TAU_RANK) -> HodgeReport:
    """Orthogonal splittings ``G = ker d + ran d*`` and ``l2(E) = ker d* + ran d``."""
    n, m = ops.dim, ops.d.shape[0]
    sq = np.sqrt(ops.edge_weight)
    wmax = float(ops.edge_weight.max()) if m else 1.0
    k0 = la.null_space(ops.d, tau, scale=1.0) if n else np.zeros((0, 0))
    r0 = la.range_basis(ops.d_star, tau, scale=wmax) if n and m else np.zeros((n, 0))
    # 1-forms in orthonormal coordinates xi = sqrt(w) eta
    k1 = la.null_space(ops.d_star, tau, scale=wmax) if m else np.zeros((0, 0))
    k1 = la.range_basis(sq[:, None] * k1, tau) if k1.size else np.zeros((m, 0))
    r1 = la.range_basis(sq[:, None] * ops.d, tau, scale=np.sqrt(wmax)) if n and m else np.zeros((m, 0))
    res0 = float(np.abs(k0.conj().T @ r0).max()) if k0.size and r0.size else 0.0
    res1 = float(np.abs(k1.conj().T @ r1).max()) if k1.size and r1.size else 0.0
    return HodgeReport(k0.shape[1] if n else 0, r0.shape[1], k1.shape[1] if m else 0,
                       r1.shape[1], n, m, res0, res1)


def spectra(ops: OperatorSet):
    """Eigenvalues of ``lap0`` and ``lap1`` from two separate Hermitian solves."""
    ev0 = np.linalg.eigvalsh(ops.lap0) if ops.dim else np.zeros(0)
    ev1 = np.linalg.eigvalsh(ops.lap1_symmetric()) if ops.d.shape[0] else np.zeros(0)
    return ev0, ev1


def supersymmetry_check(ops: OperatorSet, tol: float = SUSY_TOL):
    """Match the non-zero spectra of ``lap0`` and ``lap1``.

    Returns ``(True, pairs)``; raises :class:`SpectraMismatch` carrying the
    first unmatched eigenvalue.
    """
    ev0, ev1 = spectra(ops)
    nz0 = ev0[ev0 > tol]
    nz1 = ev1[ev1 > tol]
    pairs = la.match_multisets(nz0, nz1, tol)
    return True, pairs


def dual_kernel_iso(g: Graph, s: VertexSpace, tau: float = la.TAU_RANK) -> dict:
    """Betti numbers of the dual space against those of the oriented space.

    Also maps a basis of ``ker d*`` of the oriented space into ``G^perp``
    through ``eta -> P^perp {eta_e / l_e}`` and checks that the image lies in
    ``ker d`` of the dual space with full rank.
    """
    dual = dual_space(s)
    ori = orient_space(s)
    ops_dual = assemble(g, dual)
    ops_ori = assemble(g, ori)
    c_dual = cohomology(ops_dual, tau)
    c_ori = cohomology(ops_ori, tau)
    eta = c_ori.ker1_basis
    t = g.trace_map()
    p_perp = dual.full_projection()
    psi = p_perp @ (t @ (eta / g.lengths()[:, None])) if eta.size else np.zeros((g.n_darts, 0))
    in_kernel = float(np.abs(g.d_max() @ psi).max()) if psi.size else 0.0
    rank = la.numerical_rank(psi, tau, scale=ops_dual.natural_scale) if psi.size else 0
    record = {
        "b0_dual": c_dual.b0,
        "b1_oriented": c_ori.b1,
        "b1_dual": c_dual.b1,
        "b0_oriented": c_ori.b0,
        "psi_rank": rank,
        "psi_kernel_residual": in_kernel,
    }
    ok = (
        c_dual.b0 == c_ori.b1
        and c_dual.b1 == c_ori.b0
        and rank == c_dual.b0
        and in_kernel <= 1e-10
    )
    record["pass"] = bool(ok)
    if not ok:
        raise IsoFailed(f"dual/oriented kernel isomorphism failed: {record}")
    return record


def iota_matrix(g: Graph) -> np.ndarray:
    iota = np.zeros((g.n_darts, g.n_edges))
    for e in g.edges:
        for sgn in (-1, +1):
            iota[g.dart_index(Dart(e.id, sgn)), e.id] = 1.0 / np.sqrt(2 * e.length)
    return iota


def iota_embedding_check(g: Graph, tol: float = 1e-12) -> dict:
    """The edge embedding is an isometry onto ``ker d^max``."""
    iota = iota_matrix(g)
    gram = iota.T @ iota - np.diag(1.0 / g.lengths())
    gram_res = float(np.abs(gram).max()) if gram.size else 0.0
    dmax = g.d_max()
    ker_dim = g.n_darts - la.numerical_rank(dmax)
    sub_res = float(np.abs(dmax @ iota).max()) if iota.size else 0.0
    rank = la.numerical_rank(iota)
    ok = gram_res <= tol and ker_dim == g.n_edges and rank == ker_dim and sub_res <= tol
    return {
        "gram_residual": gram_res,
        "ker_dmax_dim": int(ker_dim),
        "range_dim": int(rank),
        "subspace_residual": sub_res,
        "pass": bool(ok),
    }


def exterior_derivative_max(g: Graph, s: VertexSpace, unoriented: bool = False) -> np.ndarray:
    """``d`` composed with ``P`` as a map on all of ``G^max``."""
    dm = g.d_max()
    if unoriented:
        dm = np.abs(dm)
    return dm @ s.full_projection()


def index_stability_fuzz(g: Graph, dims, trials: int = 10, seed: int = 0,
                         tau: float = la.TAU_RANK) -> dict:
    """Index of Haar-random spaces with fixed local dimensions, plus the model space."""
    dims = {v: int(dims[v]) if v in dims else int(dims[str(v)]) for v in g.vertices}
    expected = sum(dims.values()) - g.n_edges
    model_idx = cohomology(assemble(g, model_space(g, dims)), tau).index
    indices = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        indices.append(cohomology(assemble(g, random_space(g, dims, rng)), tau).index)
    passed = model_idx == expected and all(i == expected for i in indices)
    return {
        "expected": expected,
        "model_index": model_idx,
        "indices": indices,
        "matches": sum(i == expected for i in indices),
        "trials": trials,
        "pass": bool(passed),
    }


__all__ = [
    "OperatorSet",
    "CohomologyReport",
    "HodgeReport",
    "local_basis",
    "space_basis",
    "assemble",
    "kappa",
    "operator_norm",
    "norm_bound_check",
    "adjointness_residual",
    "curvature",
    "cohomology",
    "magnetic_cohomology_predict",
    "hodge",
    "spectra",
    "supersymmetry_check",
    "dual_kernel_iso",
    "iota_matrix",
    "iota_embedding_check",
    "exterior_derivative_max",
    "index_stability_fuzz",
]
