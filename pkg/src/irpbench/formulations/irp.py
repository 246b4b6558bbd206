"""The full inventory routing model and plan encoding/decoding.

Columns are created in the order: dispatch and visit binaries (period
major), inventory blocks (retailer major), then one routing block per
period.  Keys: ``("dispatch", t)``, ``("delta", t, i)``, ``("q", t, i)``,
``("I", t, i)``, ``("w", i, t, k)``, ``("skip", i, t)``, ``("x", t, a, b)``,
``("u", t, a)``, ``("y", t, a, b)``, ``("z", t, a, b)``.  Retailers are
numbered ``1..r`` and node 0 is the warehouse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..instance import IrpInstance
from ..milp import Model, VarIndex, VarType
from ..oracles import PlanResult, evaluate_plan, held_karp_tsp, retailer_plan_cost
from .inventory import add_cmilp_block, add_sp_block
from .tsp import add_routing_block, new_var
from .variants import FormulationSpec, InventoryVariant, TspBase

__all__ = ["build_irp", "encode_plan", "trivial_start", "rounding_heuristic", "decode_irp",
           "DecodedPlan", "find_subtours"]


def build_irp(inst: IrpInstance, spec: FormulationSpec | str) -> tuple[Model, VarIndex]:
    if not isinstance(spec, FormulationSpec):
        spec = FormulationSpec.parse(spec)
    N, r = inst.num_periods, inst.num_retailers
    model = Model(f"{inst.name}_{spec.name}")
    index = VarIndex()
    dispatch, delta = {}, {}
    for t in range(1, N + 1):
        dispatch[t] = new_var(model, index, ("dispatch", t), vtype=VarType.BINARY, obj=inst.dispatch)
        model.set_priority(dispatch[t], 1)
        for i in range(1, r + 1):
            delta[t, i] = new_var(model, index, ("delta", t, i), vtype=VarType.BINARY,
                                  obj=inst.ordering[i - 1])
            model.set_priority(delta[t, i], 1)
    block = add_cmilp_block if spec.inventory is InventoryVariant.CMILP else add_sp_block
    for i in range(1, r + 1):
        block(model, index, inst.demand[:, i - 1], inst.ordering[i - 1], inst.holding[i - 1],
              0.0, prefix=(i,), delta=[delta[t, i] for t in range(1, N + 1)])
    for t in range(1, N + 1):
        for i in range(1, r + 1):
            model.add_constraint({delta[t, i]: 1.0, dispatch[t]: -1.0}, "<=", 0.0, "dispatch_link")
        visits = [dispatch[t]] + [delta[t, i] for i in range(1, r + 1)]
        add_routing_block(model, index, inst.dist, spec.tsp, prefix=(t,), visits=visits)
    return model.freeze(), index


def _tour(inst: IrpInstance, visited: list[int]) -> tuple[int, ...]:
    if not visited:
        return (0,)
    nodes = [0] + visited
    if len(nodes) <= 12:
        order = held_karp_tsp(inst.dist[np.ix_(nodes, nodes)]).order
        return tuple(nodes[k] for k in order)
    # nearest neighbour for larger periods
    left, cur, seq = set(visited), 0, [0]
    while left:
        cur = min(left, key=lambda j: (inst.dist[cur, j], j))
        left.discard(cur)
        seq.append(cur)
    return tuple(seq + [0])


def encode_plan(inst: IrpInstance, spec: FormulationSpec | str, model: Model, index: VarIndex,
                delta, routes=None) -> np.ndarray:
    """Column values realising a visit matrix with forced quantities.

    ``delta`` is ``(N, r)`` 0/1.  ``routes[t-1]`` is a closed tour
    ``(0, a, b, ..., 0)`` over the retailers visited in period ``t``; by
    default an optimal (or nearest-neighbour) tour is used.  Raises
    ``ValueError`` if some positive demand precedes a retailer's first visit.
    """
    if not isinstance(spec, FormulationSpec):
        spec = FormulationSpec.parse(spec)
    delta = np.asarray(delta, dtype=int)
    N, r = inst.num_periods, inst.num_retailers
    n = r + 1
    vals = np.zeros(model.num_vars)

    def put(key, value):
        vals[index[key]] = value

    for i in range(1, r + 1):
        d = inst.demand[:, i - 1]
        res = retailer_plan_cost(d, delta[:, i - 1], 0.0, 0.0)
        if res is None:
            raise ValueError(f"retailer {i} runs out of stock before its first visit")
        qty = res[2]
        for t in range(1, N + 1):
            put(("delta", t, i), delta[t - 1, i - 1])
        if spec.inventory is InventoryVariant.CMILP:
            stock = 0.0
            for t in range(1, N + 1):
                stock += qty[t - 1] - d[t - 1]
                put(("q", t, i), qty[t - 1])
                put(("I", t, i), max(stock, 0.0))
        else:
            orders = [t for t in range(1, N + 1) if delta[t - 1, i - 1]]
            first = orders[0] if orders else N + 1
            for t in range(1, first):
                put(("skip", i, t), 1.0)
            for a, b in zip(orders, orders[1:] + [N + 1]):
                put(("w", i, a, b), 1.0)

    for t in range(1, N + 1):
        visited = [i for i in range(1, r + 1) if delta[t - 1, i - 1]]
        tour = tuple(routes[t - 1]) if routes is not None else _tour(inst, visited)
        if sorted(tour[1:-1]) != visited and visited:
            raise ValueError(f"route for period {t} does not match the visit pattern")
        put(("dispatch", t), 1.0 if visited else 0.0)
        k = len(visited)
        pos = {node: p for p, node in enumerate(tour[:-1])} if visited else {0: 0}
        base = spec.tsp.base
        for a, b in (zip(tour, tour[1:]) if visited else ()):
            put(("x", t, a, b), 1.0)
            if base is TspBase.SC and b != 0:
                put(("y", t, a, b), k - pos[a])
            elif base is TspBase.TWO_C:
                put(("y", t, a, b), k - pos[a])
                put(("z", t, a, b), pos[a])
        if base.uses_sequence:
            # unvisited nodes take the positions after the last visited one
            rest = [i for i in range(1, n) if i not in pos]
            for node, p in pos.items():
                if node:
                    put(("u", t, node), p)
            for p, node in enumerate(rest, start=k + 1):
                put(("u", t, node), p)
    return vals


def trivial_start(inst: IrpInstance, spec: FormulationSpec | str, model: Model,
                  index: VarIndex) -> np.ndarray:
    """Feasible columns that visit each retailer exactly when it has demand."""
    delta = (np.asarray(inst.demand) > 0).astype(int)
    return encode_plan(inst, spec, model, index, delta)


def rounding_heuristic(inst: IrpInstance, spec: FormulationSpec | str, model: Model,
                       index: VarIndex):
    """Node heuristic for :func:`~irpbench.solver.solve_mip`.

    Rounds the visit columns at 1/2, adds a visit wherever a retailer would
    otherwise run short, and routes each period optimally.  Each visit
    matrix is tried once.
    """
    if not isinstance(spec, FormulationSpec):
        spec = FormulationSpec.parse(spec)
    N, r = inst.num_periods, inst.num_retailers
    ids = np.array([[index[("delta", t, i)] for i in range(1, r + 1)] for t in range(1, N + 1)])
    positive = np.asarray(inst.demand) > 0
    seen: set[bytes] = set()

    def propose(values):
        delta = (np.asarray(values)[ids] > 0.5).astype(int)
        for i in range(r):
            covered = np.maximum.accumulate(delta[:, i]) > 0
            first_gap = np.flatnonzero(positive[:, i] & ~covered)
            if first_gap.size:
                delta[first_gap[0], i] = 1
        key = delta.tobytes()
        if key in seen:
            return None
        seen.add(key)
        return encode_plan(inst, spec, model, index, delta)

    return propose


@dataclass
class DecodedPlan:
    plan: PlanResult
    arc_routes: list[list[tuple[int, ...]]]     # cycles formed by the x columns per period
    model_cost: float

    @property
    def has_subtours(self) -> bool:
        return any(len(cycles) > 1 or (cycles and cycles[0][0] != 0) for cycles in self.arc_routes)


def find_subtours(arcs: list[tuple[int, int]]) -> list[tuple[int, ...]]:
    """Split a set of successor arcs into cycles; the depot cycle comes first."""
    succ = dict(arcs)
    seen, cycles = set(), []
    for start in sorted(succ, key=lambda a: (a != 0, a)):
        if start in seen:
            continue
        cyc, cur = [start], succ[start]
        seen.add(start)
        while cur != start and cur in succ and cur not in seen:
            seen.add(cur)
            cyc.append(cur)
            cur = succ[cur]
        cycles.append(tuple(cyc) + (start,))
    return cycles


def decode_irp(inst: IrpInstance, index: VarIndex, values, model: Model | None = None,
               tol: float = 1e-6) -> DecodedPlan:
    """Read a visit matrix and routes back from column values.

    Costs are recomputed independently of the model: the given arcs are
    priced as routed and quantities come from the ``q`` columns when present
    (otherwise from the visit pattern).
    """
    values = np.asarray(values, dtype=float)
    N, r = inst.num_periods, inst.num_retailers
    delta = np.zeros((N, r), dtype=int)
    for t in range(1, N + 1):
        for i in range(1, r + 1):
            delta[t - 1, i - 1] = int(values[index[("delta", t, i)]] > 0.5)
    cycles_all, routing, routes = [], 0.0, []
    for t in range(1, N + 1):
        arcs = [(a, b) for a in range(r + 1) for b in range(r + 1)
                if a != b and values[index[("x", t, a, b)]] > 0.5]
        cycles = find_subtours(arcs)
        cycles_all.append(cycles)
        routing += sum(inst.dist[a, b] for a, b in arcs)
        routes.append(cycles[0] if cycles and cycles[0][0] == 0 else (0,))
    base = evaluate_plan(inst, delta)
    if base is None:
        raise ValueError("decoded visit pattern is infeasible")
    qty = base.quantities
    holding = base.breakdown["holding"]
    if ("q", 1, 1) in index:
        qty = np.array([[values[index[("q", t, i)]] for i in range(1, r + 1)]
                        for t in range(1, N + 1)])
        qty[np.abs(qty) < tol] = 0.0
        holding = 0.0
        for i in range(r):
            stock = np.cumsum(qty[:, i] - inst.demand[:, i])
            holding += inst.holding[i] * float(np.clip(stock, 0.0, None).sum())
    breakdown = {"routing": routing, "ordering": base.breakdown["ordering"],
                 "holding": holding, "dispatch": base.breakdown["dispatch"]}
    total = math.fsum(breakdown.values())
    plan = PlanResult(delta, qty, total, breakdown, routes)
    model_cost = model.objective_value(values) if model is not None else math.nan
    return DecodedPlan(plan, cycles_all, model_cost)
