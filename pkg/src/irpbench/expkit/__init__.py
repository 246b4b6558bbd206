"""Experiment runner and command-line interface."""

from . import suites
from .runner import (AGG_HEADER, CSV_HEADER, ExperimentPlan, PlanError, ResultRow, aggregate_rows,
                     emit_pattern_data, run_plan, write_rows)

__all__ = ["AGG_HEADER", "CSV_HEADER", "ExperimentPlan", "PlanError", "ResultRow", "aggregate_rows",
           "emit_pattern_data", "run_plan", "write_rows", "suites"]
