"""Dirac operators, Laplacians and index theorems on decorated discrete and metric graphs."""

from .calculus import (
    OperatorSet,
    assemble,
    cohomology,
    dual_kernel_iso,
    hodge,
    index_stability_fuzz,
    iota_embedding_check,
    kappa,
    magnetic_cohomology_predict,
    supersymmetry_check,
)
from .graph import Dart, Graph, build_graph, cycle_structure, flux, line_graph, subdivision_graph
from .metric import (
    MetricProblem,
    SecularSolverConfig,
    curvature_function,
    l_to_infinity_limit_check,
    metric_kernel,
    metric_spectrum,
    scattering_matrix,
    secular_matrix,
)
from .relations import line_graph_relation, subdivision_relation, zero_form_dual_relation
from .vertex_space import (
    VertexSpace,
    classify_permutation_invariance,
    continuous_reduction,
    dual_space,
    interaction_profile,
    make_space,
    orient_space,
)

__version__ = "0.1.0"
