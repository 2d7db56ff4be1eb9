"""Seeded random graphs, vertex spaces and metric problems for fuzzing."""

from fractions import Fraction

import numpy as np

from .graph import Graph, build_graph
from .metric import CASES, MetricProblem
from .vertex_space import VertexSpace, random_space


def random_graph(rng, max_vertices=8, max_edges=14, loops=True, rational_lengths=False,
                 length_range=(1.0, 1.0)) -> Graph:
    """Random multigraph without isolated vertices.

    Multi-edges and self-loops are allowed. Every vertex gets at least one
    edge, so ``|E| >= ceil(|V| / 2)``.
    """
    n = int(rng.integers(1 if loops else 2, max_vertices + 1))
    verts = list(range(n))
    order = rng.permutation(n).tolist()
    pairs = []
    # pair up vertices first so none is isolated
    for i in range(0, n - 1, 2):
        pairs.append((order[i], order[i + 1]))
    if n % 2:
        last = order[-1]
        other = order[int(rng.integers(0, n - 1))] if n > 1 else last
        pairs.append((last, other))
    n_edges = int(rng.integers(len(pairs), max_edges + 1))
    while len(pairs) < n_edges:
        a, b = int(rng.integers(0, n)), int(rng.integers(0, n))
        if a == b and not loops:
            continue
        pairs.append((a, b))
    specs = []
    for a, b in pairs:
        if rng.random() < 0.5:
            a, b = b, a
        specs.append((a, b, _length(rng, rational_lengths, length_range)))
    return build_graph(verts, specs)


def _length(rng, rational, length_range):
    lo, hi = length_range
    if rational:
        return Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 7)))
    if lo == hi:
        return float(lo)
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_dims(rng, g: Graph) -> dict:
    return {v: int(rng.integers(0, g.deg(v) + 1)) for v in g.vertices}


def random_vertex_space(rng, g: Graph) -> VertexSpace:
    return random_space(g, random_dims(rng, g), rng)


def random_L(rng, s: VertexSpace, invertible=False) -> np.ndarray:
    """Block-diagonal positive semi-definite matrix; kernels are likely unless
    ``invertible`` is set."""
    dims = [s.dim_at(v) for v in s.graph.vertices]
    n = sum(dims)
    L = np.zeros((n, n), complex)
    o = 0
    for k in dims:
        if k:
            z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            q, _ = np.linalg.qr(z)
            lo = 1 if invertible else 0
            rank = int(rng.integers(lo * k, k + 1)) if not invertible else k
            w = np.zeros(k)
            w[:rank] = rng.uniform(0.5, 2.0, rank)
            block = (q * w) @ q.conj().T
            L[o:o + k, o:o + k] = (block + block.conj().T) / 2
        o += k
    return L


def random_problem(rng, case=None, rational_lengths=True, **graph_kw) -> MetricProblem:
    g = random_graph(rng, rational_lengths=rational_lengths, **graph_kw)
    s = random_vertex_space(rng, g)
    case = case or CASES[int(rng.integers(0, len(CASES)))]
    return MetricProblem(g, s, random_L(rng, s), case)


def trial_rngs(seed: int, trials: int):
    """Independent generators, one per trial, from a master seed."""
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed).spawn(trials)]
