"""Quasi-Newton solvers for square nonlinear systems F(x) = 0.

Four rank-one update methods (Broyden, two multipoint secant variants, and
an interpolation variant) share a nonmonotone line-search driver, plus a
benchmark harness with Dolan-More performance profiles, an HTTP service,
and a CLI client.
"""
from .bench import (
    DEFAULT_TAU_GRID,
    ProfileTable,
    RunRecord,
    default_suite,
    emit_profile,
    emit_results,
    performance_profile,
    run_suite,
)
from .exceptions import (
    DimensionNotSupportedError,
    DuplicatePointsError,
    IncompleteGridError,
    InvalidSuiteError,
    LineSearchFailedError,
    NonFiniteResultError,
    QnsolveError,
    SingularMatrixError,
    UnknownProblemError,
    UpdateSkipped,
    ZeroStepError,
    ZeroVectorError,
)
from .problems import ProblemSpec, admissible_dims, problem_names, registry_lookup
from .solver import (
    METHODS,
    IterationRecord,
    SolveReport,
    SolverConfig,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TAU_GRID",
    "METHODS",
    "DimensionNotSupportedError",
    "DuplicatePointsError",
    "IncompleteGridError",
    "InvalidSuiteError",
    "IterationRecord",
    "LineSearchFailedError",
    "NonFiniteResultError",
    "ProblemSpec",
    "ProfileTable",
    "QnsolveError",
    "RunRecord",
    "SingularMatrixError",
    "SolveReport",
    "SolverConfig",
    "UnknownProblemError",
    "UpdateSkipped",
    "ZeroStepError",
    "ZeroVectorError",
    "admissible_dims",
    "default_suite",
    "emit_profile",
    "emit_results",
    "performance_profile",
    "problem_names",
    "registry_lookup",
    "run_suite",
    "solve",
]
