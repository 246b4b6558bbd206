"""Self-contained LP simplex and branch-and-bound MILP solver."""

from .bnb import (
    GAP_UNDEFINED,
    MipResult,
    SolverConfig,
    SolverError,
    compute_gap,
    lp_gap,
    solve_lp,
    solve_mip,
)
from .simplex import LpNumericalError, LpProblem, LpSolution

__all__ = [
    "GAP_UNDEFINED", "LpNumericalError", "LpProblem", "LpSolution", "MipResult",
    "SolverConfig", "SolverError", "compute_gap", "lp_gap", "solve_lp", "solve_mip",
]
