"""Formulations, exact oracles and a small MILP solver for the inventory routing problem."""

__version__ = "0.1.0"
