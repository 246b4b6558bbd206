"""MILP intermediate representation and exporters."""

from .export import export_lp, export_mps, format_lp, format_mps
from .model import (
    DEFAULT_TOL,
    LinConstraint,
    MissingValueError,
    Model,
    ModelError,
    Sense,
    VarDef,
    VarIndex,
    VarType,
    Violation,
    check_feasible,
    lp_relaxation,
    var_name,
)

__all__ = [
    "DEFAULT_TOL", "LinConstraint", "MissingValueError", "Model", "ModelError",
    "Sense", "VarDef", "VarIndex", "VarType", "Violation", "check_feasible",
    "lp_relaxation", "var_name", "export_lp", "export_mps", "format_lp", "format_mps",
]
