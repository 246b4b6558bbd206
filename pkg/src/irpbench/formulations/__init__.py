"""MILP builders for the TSP, lot-sizing and inventory routing models."""

from ..oracles import omega
from .inventory import add_cmilp_block, add_sp_block, build_wagner_whitin_milp, build_wagner_whitin_sp
from .irp import (DecodedPlan, build_irp, decode_irp, encode_plan, find_subtours, rounding_heuristic,
                  trivial_start)
from .tsp import add_lifted_inequalities, add_routing_block, build_tsp
from .variants import (BASE_SPECS, BEKTAS_COLUMNS, FormulationSpec, Ineq, InventoryVariant, TspBase,
                       TspVariant, all_specs)

__all__ = [
    "omega", "add_cmilp_block", "add_sp_block", "build_wagner_whitin_milp", "build_wagner_whitin_sp",
    "DecodedPlan", "build_irp", "decode_irp", "encode_plan", "find_subtours", "rounding_heuristic",
    "trivial_start",
    "add_lifted_inequalities", "add_routing_block", "build_tsp",
    "BASE_SPECS", "BEKTAS_COLUMNS", "FormulationSpec", "Ineq", "InventoryVariant", "TspBase",
    "TspVariant", "all_specs",
]
