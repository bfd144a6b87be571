"""Time-fractional Black-Scholes solver: L1 time stepping with modified cubic B-spline DQM in space."""

from .analysis import (
    ConvergenceTable,
    ErrorReport,
    error_norms,
    history_errors,
    order,
    spatial_sweep,
    sweep,
    temporal_sweep,
)
from .l1 import L1Weights, history_rhs, l1_caputo, l1_weights
from .model import Coefficients, MarketParams, ProblemSpec, example1, example2, make_problem
from .numerics import LUFactorization, SingularMatrixError, gamma_fn, lu_factor, solve
from .solver import Mesh, NumericalFailure, SolutionHistory, solve_problem
from .stability import StabilityReport, check_stability
from .weights import WeightMatrices, weight_matrices

__version__ = "0.1.0"

__all__ = [
    "Coefficients",
    "ConvergenceTable",
    "ErrorReport",
    "L1Weights",
    "LUFactorization",
    "MarketParams",
    "Mesh",
    "NumericalFailure",
    "ProblemSpec",
    "SingularMatrixError",
    "SolutionHistory",
    "StabilityReport",
    "WeightMatrices",
    "check_stability",
    "error_norms",
    "example1",
    "example2",
    "gamma_fn",
    "history_errors",
    "history_rhs",
    "l1_caputo",
    "l1_weights",
    "lu_factor",
    "make_problem",
    "order",
    "solve",
    "solve_problem",
    "spatial_sweep",
    "sweep",
    "temporal_sweep",
    "weight_matrices",
]
