"""Exact reference algorithms used to validate formulations and the solver.

None of these touch the MILP machinery: Held-Karp is a bitmask dynamic
program, Wagner-Whitin is a shortest path over order arcs, and
:func:`brute_force_irp` enumerates every visit pattern.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .instance import IrpInstance

__all__ = [
    "TourResult",
    "PlanResult",
    "LotSizingResult",
    "OracleSizeError",
    "omega",
    "wagner_whitin_dp",
    "held_karp_tsp",
    "tour_cost",
    "brute_force_irp",
    "retailer_plan_cost",
    "evaluate_plan",
]

HELD_KARP_MAX = 18
BRUTE_FORCE_MAX_CELLS = 16


class OracleSizeError(ValueError):
    """Instance exceeds what an exhaustive oracle can handle."""


@dataclass(frozen=True)
class TourResult:
    order: tuple[int, ...]     # starts and ends at node 0
    cost: float


@dataclass(frozen=True)
class LotSizingResult:
    cost: float
    order_periods: tuple[int, ...]     # 1-based
    quantities: tuple[float, ...]


@dataclass
class PlanResult:
    delta: np.ndarray              # (N, r) 0/1 visit matrix
    quantities: np.ndarray         # (N, r) delivered amounts
    total_cost: float
    breakdown: dict[str, float]
    routes: list[tuple[int, ...]] = field(default_factory=list)


def omega(i: int, j: int, demand: Sequence[float], K: float, h: float, v: float = 0.0) -> float:
    """Cost of ordering in period ``i`` to cover demand of periods ``i..j-1``.

    Periods are 1-based and ``1 <= i < j <= N + 1``.
    """
    n = len(demand)
    if not 1 <= i < j <= n + 1:
        raise ValueError(f"need 1 <= i < j <= {n + 1}, got i={i}, j={j}")
    total = 0.0
    holding = 0.0
    for k in range(i, j):
        d = demand[k - 1]
        total += d
        holding += (k - i) * d
    return K + v * total + h * holding


def wagner_whitin_dp(demand: Sequence[float], K: float, h: float, v: float = 0.0) -> LotSizingResult:
    """Optimal uncapacitated lot sizing with zero starting and ending stock.

    Forward shortest path over nodes ``1..N+1``; an arc ``(i, j)`` orders in
    period ``i`` for periods ``i..j-1``.  A period with zero demand may also be
    skipped at no cost, so a zero series costs nothing.
    """
    d = [float(x) for x in demand]
    if any(x < 0 for x in d):
        raise ValueError("demand must be nonnegative")
    n = len(d)
    if n < 1:
        raise ValueError("need at least one period")
    best = [math.inf] * (n + 2)
    pred: list[tuple[int, bool]] = [(0, False)] * (n + 2)
    best[1] = 0.0
    for i in range(1, n + 1):
        if not math.isfinite(best[i]):
            continue
        if d[i - 1] == 0 and best[i] < best[i + 1]:
            best[i + 1] = best[i]
            pred[i + 1] = (i, False)
        for j in range(i + 1, n + 2):
            cost = best[i] + omega(i, j, d, K, h, v)
            if cost < best[j] - 1e-12:
                best[j] = cost
                pred[j] = (i, True)
    orders, qty = [], []
    j = n + 1
    while j > 1:
        i, is_order = pred[j]
        if is_order:
            orders.append(i)
            qty.append(sum(d[i - 1:j - 1]))
        j = i
    return LotSizingResult(best[n + 1], tuple(reversed(orders)), tuple(reversed(qty)))


def tour_cost(dist, order: Sequence[int]) -> float:
    return float(sum(dist[a][b] for a, b in zip(order, order[1:])))


def held_karp_tsp(dist) -> TourResult:
    """Exact minimum Hamiltonian cycle through all nodes, starting at node 0.

    Bitmask dynamic program, vectorised over subsets of equal size.
    Supports ``2 <= n <= 18``; the matrix may be asymmetric.
    """
    D = np.asarray(dist, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n) or not 2 <= n <= HELD_KARP_MAX:
        raise OracleSizeError(f"held_karp_tsp needs a square matrix with 2 <= n <= {HELD_KARP_MAX}")
    if n == 2:
        return TourResult((0, 1, 0), float(D[0, 1] + D[1, 0]))
    k = n - 1                       # nodes 1..n-1 map to bits 0..k-1
    full = 1 << k
    dp = np.full((full, k), np.inf)
    parent = np.full((full, k), -1, dtype=np.int64)
    for j in range(k):
        dp[1 << j, j] = D[0, j + 1]
    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for b in range(k):
        popcount += (masks >> b) & 1
    sub = D[1:, 1:]
    for size in range(2, k + 1):
        layer = masks[popcount == size]
        for j in range(k):
            with_j = layer[(layer >> j) & 1 == 1]
            prev = with_j ^ (1 << j)
            cand = dp[prev] + sub[:, j]          # (len, k): arrive at j from each i
            arg = np.argmin(cand, axis=1)
            dp[with_j, j] = cand[np.arange(len(with_j)), arg]
            parent[with_j, j] = arg
    closing = dp[full - 1] + D[1:, 0]
    last = int(np.argmin(closing))
    cost = float(closing[last])
    order = [0]
    mask, j = full - 1, last
    path = []
    while j >= 0:
        path.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj if mask else -1
    order += list(reversed(path)) + [0]
    return TourResult(tuple(order), cost)


def retailer_plan_cost(demand: Sequence[float], orders: Sequence[int], K: float, h: float
                       ) -> tuple[float, float, list[float]] | None:
    """Ordering and holding cost of a 0/1 order pattern with forced quantities.

    Each order covers demand up to the next order.  Returns ``None`` when
    some positive demand precedes the first order (stockout).
    """
    n = len(demand)
    quantities = [0.0] * n
    holding = 0.0
    current = None
    for t in range(n):
        if orders[t]:
            current = t
        if demand[t] > 0:
            if current is None:
                return None
            quantities[current] += demand[t]
            holding += h * (t - current) * demand[t]
    ordering = K * sum(1 for o in orders if o)
    return ordering, holding, quantities


def evaluate_plan(inst: IrpInstance, delta) -> PlanResult | None:
    """Cost of visiting ``delta[t, i]`` with forced quantities and optimal routes."""
    delta = np.asarray(delta, dtype=int)
    n_per, r = inst.num_periods, inst.num_retailers
    qty = np.zeros((n_per, r))
    ordering = holding = 0.0
    for i in range(r):
        res = retailer_plan_cost(inst.demand[:, i], delta[:, i], inst.ordering[i], inst.holding[i])
        if res is None:
            return None
        o, hcost, q = res
        ordering += o
        holding += hcost
        qty[:, i] = q
    routing = dispatch = 0.0
    routes = []
    for t in range(n_per):
        visited = tuple(int(i) + 1 for i in np.flatnonzero(delta[t]))
        route = _route(inst, visited)
        routes.append(route.order)
        routing += route.cost
        if visited:
            dispatch += inst.dispatch
    total = routing + ordering + holding + dispatch
    return PlanResult(delta.copy(), qty, total,
                      {"routing": routing, "ordering": ordering, "holding": holding,
                       "dispatch": dispatch}, routes)


def _route(inst: IrpInstance, visited: tuple[int, ...]) -> TourResult:
    if not visited:
        return TourResult((0,), 0.0)
    nodes = (0,) + visited
    sub = inst.dist[np.ix_(nodes, nodes)]
    tour = held_karp_tsp(sub)
    return TourResult(tuple(nodes[k] for k in tour.order), tour.cost)


def brute_force_irp(inst: IrpInstance) -> PlanResult:
    """Optimal IRP plan by enumerating every visit matrix.

    For a fixed visit matrix the cheapest quantities deliver, at each visit,
    the demand up to the retailer's next visit, and each period's route is a
    Held-Karp tour over the visited retailers.  Limited to ``r * N <= 16``.
    Units are always delivered at the latest visit before they are needed,
    which also fixes quantities when a holding cost is zero; ties between
    visit matrices go to the first one in enumeration order.
    """
    n_per, r = inst.num_periods, inst.num_retailers
    if r * n_per > BRUTE_FORCE_MAX_CELLS:
        raise OracleSizeError(f"brute_force_irp needs r*N <= {BRUTE_FORCE_MAX_CELLS}")
    # per-retailer cost of each of the 2^N order patterns (None = infeasible)
    patterns = list(itertools.product((0, 1), repeat=n_per))
    inv_cost = []
    for i in range(r):
        costs = []
        for pat in patterns:
            res = retailer_plan_cost(inst.demand[:, i], pat, inst.ordering[i], inst.holding[i])
            costs.append(math.inf if res is None else res[0] + res[1])
        inv_cost.append(costs)

    @lru_cache(maxsize=None)
    def period_cost(visited: tuple[int, ...]) -> float:
        if not visited:
            return 0.0
        return _route(inst, visited).cost + inst.dispatch

    best = math.inf
    best_choice = None
    feasible = [[p for p in range(len(patterns)) if math.isfinite(inv_cost[i][p])] for i in range(r)]
    for choice in itertools.product(*[reversed(f) for f in feasible]):
        total = sum(inv_cost[i][p] for i, p in enumerate(choice))
        if total >= best:
            continue
        for t in range(n_per):
            visited = tuple(i + 1 for i, p in enumerate(choice) if patterns[p][t])
            total += period_cost(visited)
            if total >= best:
                break
        if total < best - 1e-9:
            best = total
            best_choice = choice
    delta = np.array([[patterns[p][t] for p in best_choice] for t in range(n_per)], dtype=int)
    plan = evaluate_plan(inst, delta)
    assert plan is not None
    return plan
