"""Spectral identities at unit edge lengths: line graph, subdivision and dual space."""

from __future__ import annotations

import numpy as np

from . import _linalg as la
from .calculus import assemble, spectra, supersymmetry_check
from .errors import NotRegular, PreconditionViolated
from .graph import Graph, cycle_structure, line_graph, subdivision_graph
from .vertex_space import VertexSpace, dual_space, make_space, reduced_operators

MATCH_TOL = 1e-9


def _require_unit_lengths(g: Graph):
    if np.any(np.abs(g.lengths() - 1.0) > 0):
        raise PreconditionViolated("all edge lengths must equal 1")


def _require_connected(g: Graph):
    if cycle_structure(g).component_count != 1:
        raise PreconditionViolated("graph must be connected")


def standard_spectrum(g: Graph) -> np.ndarray:
    """Eigenvalues of the 0-form Laplacian of the standard space."""
    return spectra(assemble(g, make_space(g, "standard")))[0]


def _count_near(values, point, tol):
    return int(np.count_nonzero(np.abs(np.asarray(values) - point) <= tol))


def line_graph_relation(g: Graph, tol: float = MATCH_TOL) -> dict:
    deg = g.is_regular()
    if deg is None:
        raise NotRegular("graph is not regular")
    if deg < 2:
        raise PreconditionViolated("degree must be at least 2")
    _require_unit_lengths(g)
    _require_connected(g)
    lg = line_graph(g)
    top = deg / (deg - 1)
    factor = deg / (2 * (deg - 1))

    spec_g = standard_spectrum(g)
    spec_l = standard_spectrum(lg)
    lhs = la.drop_near(spec_l, [top], tol)
    rhs = factor * la.drop_near(spec_g, [2.0], tol)
    pairs = la.match_multisets(lhs, rhs, tol)

    # oriented-standard 1-form Laplacian against the line graph Laplacian
    ops = assemble(g, make_space(g, "oriented_standard"))
    ones = {(v, dt): 1.0 for v in lg.vertices for dt in lg.darts_at[v]}
    lap_line = reduced_operators(lg, ones)[2]
    target = 2 * np.eye(g.n_edges) - ((2 * deg - 2) / deg) * lap_line
    identity_res = float(np.abs(ops.lap1 - target).max())

    in_range = bool(spec_l.min() >= -tol and spec_l.max() <= top + tol)
    supersymmetry_check(assemble(lg, make_space(lg, "standard")), tol)
    supersymmetry_check(ops, tol)
    ok = identity_res <= 1e-12 and in_range
    return {
        "degree": deg,
        "scale": factor,
        "excluded_line": top,
        "spectrum_graph": spec_g.tolist(),
        "spectrum_line": spec_l.tolist(),
        "pairs": pairs,
        "identity_residual": identity_res,
        "spectrum_in_range": in_range,
        "pass": bool(ok),
    }


def eta_preimage(mu: float):
    """Both solutions of ``2 x (2 - x) = mu``."""
    r = np.sqrt(max(1.0 - mu / 2.0, 0.0))
    return (1.0 - r, 1.0 + r)


def subdivision_relation(g: Graph, tol: float = MATCH_TOL) -> dict:
    _require_unit_lengths(g)
    _require_connected(g)
    sg = subdivision_graph(g)
    spec_g = standard_spectrum(g)
    spec_s = standard_spectrum(sg)
    pre = [x for mu in la.drop_near(spec_g, [2.0], tol) for x in eta_preimage(mu)]
    pairs = la.match_multisets(la.drop_near(spec_s, [1.0], tol), pre, tol)
    supersymmetry_check(assemble(sg, make_space(sg, "standard")), tol)
    return {
        "spectrum_graph": spec_g.tolist(),
        "spectrum_subdivision": spec_s.tolist(),
        "pairs": pairs,
        "multiplicity_of_one": _count_near(spec_s, 1.0, tol),
        "pass": True,
    }


def zero_form_dual_relation(g: Graph, s: VertexSpace, tol: float = MATCH_TOL) -> dict:
    _require_unit_lengths(g)
    spec = spectra(assemble(g, s))[0]
    spec_dual = spectra(assemble(g, dual_space(s)))[0]
    lhs = la.drop_near(spec_dual, [0.0, 2.0], tol)
    rhs = 2.0 - la.drop_near(spec, [0.0, 2.0], tol)
    pairs = la.match_multisets(lhs, rhs, tol)
    return {
        "spectrum": spec.tolist(),
        "spectrum_dual": spec_dual.tolist(),
        "pairs": pairs,
        # reported only; no claim is made about these
        "multiplicities_at_0": (_count_near(spec, 0.0, tol), _count_near(spec_dual, 0.0, tol)),
        "multiplicities_at_2": (_count_near(spec, 2.0, tol), _count_near(spec_dual, 2.0, tol)),
        "pass": True,
    }
