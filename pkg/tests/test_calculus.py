import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphdirac import _linalg as la
from graphdirac.calculus import (
    adjointness_residual,
    assemble,
    cohomology,
    dual_kernel_iso,
    exterior_derivative_max,
    hodge,
    index_stability_fuzz,
    iota_embedding_check,
    iota_matrix,
    kappa,
    magnetic_cohomology_predict,
    norm_bound_check,
    operator_norm,
    spectra,
    supersymmetry_check,
)
from graphdirac.errors import RankAmbiguous, SpectraMismatch
from graphdirac.graph import build_graph
from graphdirac.sampling import random_graph, random_vertex_space
from graphdirac.vertex_space import dual_space, make_space, model_space, orient_space

from conftest import complete, cycle

seeds = st.integers(0, 2**32 - 1)


def _ops(g, kind, **params):
    return assemble(g, make_space(g, kind, params or None))


# assembly

def test_single_edge_standard(edge):
    ops = _ops(edge, "standard")
    np.testing.assert_allclose(ops.d, [[-1, 1]], atol=1e-15)
    assert operator_norm(ops) == pytest.approx(math.sqrt(2))
    assert kappa(edge, make_space(edge, "standard")) == pytest.approx(1.0)
    assert norm_bound_check(ops)["pass"]


def test_minimal_space_is_empty(c3):
    ops = _ops(c3, "minimal")
    assert ops.d.shape == (3, 0) and ops.lap0.shape == (0, 0)
    np.testing.assert_array_equal(ops.lap1, np.zeros((3, 3)))


@pytest.mark.parametrize("length", [1, 2, 0.3])
def test_maximal_single_edge_lap1(length):
    g = build_graph(["a", "b"], [("a", "b", length)])
    np.testing.assert_allclose(_ops(g, "maximal").lap1, [[2 / length]])


def test_operator_identities_random_lengths():
    rng = np.random.default_rng(3)
    g = random_graph(rng, length_range=(0.1, 10))
    ops = assemble(g, random_vertex_space(rng, g))
    np.testing.assert_allclose(ops.lap0, ops.d_star @ ops.d)
    np.testing.assert_allclose(ops.lap1, ops.d @ ops.d_star)
    D = ops.dirac()
    np.testing.assert_allclose(D @ D, np.block([[ops.lap0, np.zeros((ops.dim, g.n_edges))],
                                                [np.zeros((g.n_edges, ops.dim)), ops.lap1]]), atol=1e-12)


# kappa

def test_kappa_examples():
    g = cycle(4, [0.5] * 4)
    assert kappa(g, make_space(g, "sum")) == pytest.approx(2.0)
    g = cycle(3, [1, 2, 4])
    # rank-one block: |(1/d) 1 1^T diag(w)| = |w|_2 / sqrt(d)
    expected = max(math.hypot(*(1 / g.edge(d.edge).length for d in g.darts_at[v])) / math.sqrt(2)
                   for v in g.vertices)
    assert kappa(g, make_space(g, "standard")) == pytest.approx(expected)
    assert kappa(g, make_space(g, "minimal")) == 0


# cohomology

def test_cohomology_examples(c3, edge):
    r = cohomology(_ops(c3, "standard"))
    assert (r.b0, r.b1, r.index) == (1, 1, 0)
    r = cohomology(_ops(c3, "oriented_standard"))
    assert (r.b0, r.b1, r.index) == (0, 0, 0)
    k4 = complete(4)
    r = cohomology(_ops(k4, "minimal"))
    assert (r.b0, r.b1, r.index) == (0, 6, -6)
    r = cohomology(assemble(edge, model_space(edge, {"a": 1, "b": 0})))
    assert r.index == 0 and r.passed


def test_cohomology_report_fields(k4):
    r = cohomology(_ops(k4, "standard"))
    assert r.dimG == 4 and r.n_edges == 6
    assert r.ker0_basis.shape == (4, 1) and r.ker1_basis.shape == (6, 3)
    assert set(map(str, r.curvature.values())) == {"-1/2"}
    names = {c["name"] for c in r.checks}
    assert names == {"index_theorem", "gauss_bonnet"}


def test_kernel_bases_are_kernels(k4):
    ops = _ops(k4, "standard")
    r = cohomology(ops)
    np.testing.assert_allclose(ops.d @ r.ker0_basis, 0, atol=1e-12)
    np.testing.assert_allclose(ops.d_star @ r.ker1_basis, 0, atol=1e-12)
    # orthonormal for the weighted product
    gram = r.ker1_basis.conj().T @ (ops.edge_weight[:, None] * r.ker1_basis)
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-12)


def test_rank_ambiguous_on_ill_conditioned_space():
    g = build_graph("abc", [("a", "b"), ("b", "c")])
    eps = 3e-10
    v = np.array([1.0, eps]) / math.hypot(1.0, eps)
    mats = {"a": np.eye(1), "b": np.outer(v, v), "c": np.zeros((1, 1))}
    s = make_space(g, "custom", {"matrices": mats})
    with pytest.raises(RankAmbiguous):
        cohomology(assemble(g, s))


def test_numerical_rank_gray_zone():
    with pytest.raises(RankAmbiguous):
        la.numerical_rank(np.diag([1.0, 1e-10]))
    assert la.numerical_rank(np.diag([1.0, 1e-16])) == 1
    assert la.numerical_rank(np.diag([1.0, 1e-6])) == 2
    assert la.numerical_rank(np.full((2, 2), 1e-17), scale=1.0) == 0


# magnetic prediction

def test_magnetic_prediction_examples(c3):
    assert magnetic_cohomology_predict(c3, [math.pi, 0, 0]) == (0, 0)
    assert magnetic_cohomology_predict(c3, [2 * math.pi, 0, 0]) == (1, 1)
    tree = build_graph(range(4), [(0, 1), (1, 2), (1, 3)])
    assert magnetic_cohomology_predict(tree, [0.3, 1.0, 2.0]) == (1, 0)


@given(seeds)
def test_magnetic_prediction_matches_cohomology(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    alpha = rng.uniform(-4, 4, g.n_edges)
    # quantise some fluxes to multiples of 2 pi
    if rng.random() < 0.5:
        alpha = 2 * math.pi * rng.integers(-2, 3, g.n_edges)
    s = make_space(g, "magnetic", {"alpha": list(alpha)})
    r = cohomology(assemble(g, s))
    assert (r.b0, r.b1) == magnetic_cohomology_predict(g, alpha)


# hodge

def test_hodge_examples(c3, edge):
    h = hodge(_ops(c3, "standard"))
    assert (h.ker_d, h.ran_d_star, h.ker_d_star, h.ran_d) == (1, 2, 1, 2)
    h = hodge(_ops(c3, "minimal"))
    assert (h.dimG, h.ker_d, h.ker_d_star) == (0, 0, 3)
    h = hodge(_ops(edge, "maximal"))
    assert (h.ker_d, h.ran_d_star) == (1, 1)
    assert h.passed


@given(seeds)
def test_hodge_property(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, length_range=(0.1, 10))
    h = hodge(assemble(g, random_vertex_space(rng, g)))
    assert h.passed
    assert h.ran_d == h.ran_d_star


# supersymmetry

def test_supersymmetry_triangle(c3):
    ok, pairs = supersymmetry_check(_ops(c3, "standard"))
    assert ok
    np.testing.assert_allclose([a for a, _ in pairs], [1.5, 1.5])
    assert supersymmetry_check(_ops(c3, "minimal")) == (True, [])


def test_supersymmetry_mismatch_reports_eigenvalue():
    with pytest.raises(SpectraMismatch) as info:
        la.match_multisets([1.0, 2.0], [1.0, 2.5], 1e-9)
    assert info.value.eigenvalue == 2.0


def test_standard_spectrum_against_oracle():
    from oracles import normalized_laplacian, spectrum

    for g in (cycle(3), cycle(4), complete(4), cycle(6)):
        np.testing.assert_allclose(spectra(_ops(g, "standard"))[0], spectrum(normalized_laplacian(g)),
                                   atol=1e-12)


# dual kernel isomorphism

def test_dual_kernel_iso_examples(c3, c4):
    r = dual_kernel_iso(c4, make_space(c4, "standard"))
    assert r["b0_dual"] == r["b1_oriented"] == 1
    r = dual_kernel_iso(c3, make_space(c3, "standard"))
    assert r["b0_dual"] == 0
    r = dual_kernel_iso(c3, make_space(c3, "maximal"))
    assert r["b0_dual"] == 0 and r["pass"]


@given(seeds)
def test_dual_kernel_iso_property(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, length_range=(0.2, 5))
    assert dual_kernel_iso(g, random_vertex_space(rng, g))["pass"]


# embedding of edges

def test_iota_single_edge_length_two():
    g = build_graph(["a", "b"], [("a", "b", 2)])
    iota = iota_matrix(g)
    np.testing.assert_allclose(iota @ [1.0], [0.5, 0.5])
    assert (iota @ [1.0]) @ (iota @ [1.0]) == pytest.approx(1 / 2)


@given(seeds)
def test_iota_property(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, length_range=(0.1, 10))
    r = iota_embedding_check(g)
    assert r["pass"] and r["ker_dmax_dim"] == g.n_edges
    iota = iota_matrix(g)
    gram = iota.T @ iota
    assert np.count_nonzero(gram - np.diag(np.diag(gram))) == 0


# index stability

def test_index_fuzz_examples(edge, c3):
    r = index_stability_fuzz(edge, {"a": 1, "b": 1}, trials=10, seed=1)
    assert r["pass"] and set(r["indices"]) == {1}
    r = index_stability_fuzz(edge, {"a": 0, "b": 0}, trials=3, seed=1)
    assert r["pass"] and r["expected"] == -1
    r = index_stability_fuzz(c3, {v: 1 for v in c3.vertices}, trials=20, seed=5)
    assert r["pass"] and r["indices"] == [0] * 20


def test_index_fuzz_reproducible(k4):
    a = index_stability_fuzz(k4, {v: 2 for v in k4.vertices}, trials=5, seed=11)
    b = index_stability_fuzz(k4, {v: 2 for v in k4.vertices}, trials=5, seed=11)
    assert a == b


# properties on random spaces

@given(seeds)
def test_random_space_theorems(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, length_range=(0.1, 10))
    s = random_vertex_space(rng, g)
    ops = assemble(g, s)
    r = cohomology(ops)
    assert r.index == s.dim - g.n_edges
    assert sum(r.curvature.values()) == r.index
    assert norm_bound_check(ops)["pass"]
    assert adjointness_residual(ops, rng) <= 1e-12
    supersymmetry_check(ops)


@given(seeds)
def test_unoriented_derivative_identity(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng)
    s = random_vertex_space(rng, g)
    lhs = exterior_derivative_max(g, orient_space(s))
    rhs = exterior_derivative_max(g, s, unoriented=True) @ g.tau()
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@given(seeds)
def test_dual_sum_rule(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, length_range=(0.1, 10))
    s = random_vertex_space(rng, g)
    total = assemble(g, s).lap1 + assemble(g, dual_space(s)).lap1
    np.testing.assert_allclose(total, 2 * np.diag(1 / g.lengths()), atol=1e-12 * total.max())
