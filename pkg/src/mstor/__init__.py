"""Synchronous multi-splitting two-stage TOR iteration for weakly nonlinear systems ``A x = G(x)``."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .matclass import MatrixClassReport, is_h_matrix, is_m_matrix, is_monotone, spectral_radius_nonneg
from .nonlinear import (
    BoundedMap,
    WeaklyNonlinearProblem,
    componentwise_map,
    evaluate_map,
    generate_grid_problem,
    laplacian_1d,
    laplacian_2d,
    make_problem,
    verify_p_bound,
)
from .solver import (
    InnerSchedule,
    IterationReport,
    SolverConfig,
    SolverState,
    inner_sweep,
    local_iterate,
    outer_step,
    preset_parameters,
    residual,
    solve,
)
from .sparse import (
    abs_matrix,
    comparison_matrix,
    csr,
    dense_lu_solve,
    from_triples,
    lower_triangular_solve,
)
from .splitting import (
    HypothesisReport,
    MultiSplitting,
    TorParameters,
    TwoStageSplit,
    build_multisplitting,
    tor_matrices,
    tor_parameter_bound,
    two_stage_decompose,
    validate_h_hypotheses,
    validate_monotone_hypotheses,
)

__version__ = "0.1.0"
