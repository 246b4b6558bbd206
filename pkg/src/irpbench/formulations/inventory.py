"""Uncapacitated lot-sizing blocks: big-M (CMILP) and shortest path (SP).

Periods are 1-based.  Both blocks start and end with zero stock.  The SP
network has nodes ``1..N+1``; arc ``(t, k)`` orders in ``t`` for periods
``t..k-1`` at cost :func:`~irpbench.oracles.omega`.  A period with zero
demand also gets a free skip arc ``(t, t+1)`` that places no order, so a
retailer need not be visited just to start the path.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..milp import Model, VarIndex, VarType
from ..oracles import omega
from .tsp import new_var

__all__ = [
    "add_cmilp_block",
    "add_sp_block",
    "build_wagner_whitin_milp",
    "build_wagner_whitin_sp",
]


def _check(demand) -> np.ndarray:
    d = np.asarray(demand, dtype=float)
    if d.ndim != 1 or d.size < 1:
        raise ValueError("demand must be a nonempty 1-D series")
    if (d < 0).any():
        raise ValueError("demand must be nonnegative")
    return d


def add_cmilp_block(model: Model, index: VarIndex, demand, K: float, h: float, v: float = 0.0,
                    prefix: tuple = (), delta: Sequence[int] | None = None) -> list[int]:
    """Balance and setup rows for one series; returns the order-indicator ids.

    ``delta`` supplies existing indicator columns (periods 1..N); otherwise
    binaries ``("delta",) + prefix`` are created with ordering cost ``K``.
    """
    d = _check(demand)
    N = d.size
    pt = tuple(prefix)
    if delta is None:
        delta = [new_var(model, index, ("delta", t) + pt, vtype=VarType.BINARY, obj=K)
                 for t in range(1, N + 1)]
    tail = np.cumsum(d[::-1])[::-1]          # remaining demand from period t on
    prev = None
    for t in range(1, N + 1):
        q = new_var(model, index, ("q", t) + pt, obj=v)
        stock = new_var(model, index, ("I", t) + pt, hi=0.0 if t == N else np.inf, obj=h)
        terms = {stock: 1.0, q: -1.0}
        if prev is not None:
            terms[prev] = -1.0
        model.add_constraint(terms, "=", -d[t - 1], "ww_balance")
        model.add_constraint({q: 1.0, delta[t - 1]: -float(tail[t - 1])}, "<=", 0.0, "ww_setup")
        prev = stock
    return list(delta)


def add_sp_block(model: Model, index: VarIndex, demand, K: float, h: float, v: float = 0.0,
                 prefix: tuple = (), delta: Sequence[int] | None = None) -> list[int]:
    """Path arcs and flow rows for one series; returns the order-indicator ids.

    With ``delta`` given, ``delta_t`` is tied to the arcs leaving node ``t``
    and the arcs carry the inventory cost without ``K`` (the caller prices
    the indicator).  Otherwise no indicator columns exist and the arcs carry
    the full ``omega`` cost.
    """
    d = _check(demand)
    N = d.size
    pt = tuple(prefix)
    own = delta is None
    w = {}
    for t in range(1, N + 1):
        for k in range(t + 1, N + 2):
            cost = omega(t, k, d, K, h, v) - (0.0 if own else K)
            w[t, k] = new_var(model, index, ("w",) + pt + (t, k), hi=1.0, obj=cost)
    skip = {t: new_var(model, index, ("skip",) + pt + (t,), hi=1.0)
            for t in range(1, N + 1) if d[t - 1] == 0}
    for node in range(1, N + 2):
        terms = {}
        for (a, b), vid in w.items():
            if a == node:
                terms[vid] = terms.get(vid, 0.0) + 1.0
            if b == node:
                terms[vid] = terms.get(vid, 0.0) - 1.0
        if node in skip:
            terms[skip[node]] = 1.0
        if node - 1 in skip:
            terms[skip[node - 1]] = -1.0
        rhs = 1.0 if node == 1 else (-1.0 if node == N + 1 else 0.0)
        model.add_constraint(terms, "=", rhs, "sp_flow")
    if own:
        return []
    for t in range(1, N + 1):
        terms = {w[t, k]: -1.0 for k in range(t + 1, N + 2)}
        terms[delta[t - 1]] = 1.0
        model.add_constraint(terms, "=", 0.0, "sp_link")
    return list(delta)


def build_wagner_whitin_milp(demand, K: float, h: float, v: float = 0.0) -> tuple[Model, VarIndex]:
    """Single-item lot sizing as a big-M MILP."""
    model, index = Model("ww_milp"), VarIndex()
    add_cmilp_block(model, index, demand, K, h, v)
    return model.freeze(), index


def build_wagner_whitin_sp(demand, K: float, h: float, v: float = 0.0) -> tuple[Model, VarIndex]:
    """Single-item lot sizing as a shortest-path LP (no integer columns)."""
    model, index = Model("ww_sp"), VarIndex()
    add_sp_block(model, index, demand, K, h, v)
    return model.freeze(), index
