"""Routing blocks: TSP subtour elimination variants and lifted inequalities.

Nodes are ``0..n-1`` with node 0 the depot.  The same block serves the
standalone TSP (every node visited) and one IRP period, where node ``i`` is
visited iff a binary visit variable is 1.  With partial visits the flow
models use the number of visited nodes in place of ``n - 1`` and the
two-commodity couplings become inequalities.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from ..milp import Model, VarIndex, VarType, var_name
from .variants import Ineq, TspBase, TspVariant

__all__ = ["build_tsp", "add_routing_block", "add_lifted_inequalities", "new_var"]


def new_var(model: Model, index: VarIndex, key: tuple, lo: float = 0.0, hi: float = np.inf,
            vtype: VarType = VarType.CONTINUOUS, obj: float = 0.0) -> int:
    """Add a column named after its semantic key and index it."""
    vid = model.add_var(var_name(key[0], *key[1:]), lo, hi, vtype, obj)
    index.add(key, vid)
    return vid


class _Visit:
    """Visit indicator of one node: a variable id, or the constant 1."""

    __slots__ = ("vid",)

    def __init__(self, vid: int | None):
        self.vid = vid

    def move(self, terms: dict, coef: float) -> float:
        """Add ``coef * visit`` to ``terms``; returns what goes to the rhs."""
        if self.vid is None:
            return -coef
        terms[self.vid] = terms.get(self.vid, 0.0) + coef
        return 0.0


def add_routing_block(model: Model, index: VarIndex, dist, variant: TspVariant,
                      prefix: tuple = (), visits: Sequence[int | None] | None = None,
                      weight: float = 1.0) -> dict[tuple[int, int], int]:
    """Add arc variables and the subtour elimination rows of ``variant``.

    ``visits[i]`` is the id of node ``i``'s visit variable (``visits[0]``
    is the depot's) or ``None`` when the node is always visited.  Keys carry
    ``prefix`` after the symbol, e.g. ``("x", t, i, j)``.  Returns the arc
    variable ids.
    """
    D = np.asarray(dist, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n) or n < 2:
        raise ValueError("distance matrix must be square with at least 2 nodes")
    vis = [_Visit(None) for _ in range(n)] if visits is None else [_Visit(v) for v in visits]
    if len(vis) != n:
        raise ValueError("need one visit entry per node")
    partial = any(v.vid is not None for v in vis)
    pt = tuple(prefix)
    x = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                x[i, j] = new_var(model, index, ("x",) + pt + (i, j), vtype=VarType.BINARY,
                                  obj=weight * D[i, j])
    for i in range(n):
        terms = {x[i, j]: 1.0 for j in range(n) if j != i}
        model.add_constraint(terms, "=", vis[i].move(terms, -1.0), "assign_out")
    for j in range(n):
        terms = {x[i, j]: 1.0 for i in range(n) if i != j}
        model.add_constraint(terms, "=", vis[j].move(terms, -1.0), "assign_in")

    base = variant.base
    if base.uses_sequence:
        u = {i: new_var(model, index, ("u",) + pt + (i,), 1.0, n - 1.0) for i in range(1, n)}
        for i, j in itertools.permutations(range(1, n), 2):
            terms = {u[i]: 1.0, u[j]: -1.0, x[i, j]: n - 1.0}
            if base is TspBase.DL:
                terms[x[j, i]] = n - 3.0
                model.add_constraint(terms, "<=", n - 2.0, "dl")
            else:
                model.add_constraint(terms, "<=", n - 2.0, "mtz")
        if base is TspBase.MTZ_2CLQ:
            for i, j in itertools.combinations(range(1, n), 2):
                model.add_constraint({x[i, j]: 1.0, x[j, i]: 1.0}, "<=", 1.0, "2clq")
        add_lifted_inequalities(model, x, u, n, variant.extras)
    elif base is TspBase.SC:
        _single_commodity(model, index, pt, x, vis, n)
    else:
        _two_commodity(model, index, pt, x, vis, n, partial)
    return x


def _single_commodity(model, index, pt, x, vis, n):
    # one unit is dropped at every visited node; no flow returns to the depot
    y = {(i, j): new_var(model, index, ("y",) + pt + (i, j))
         for (i, j) in x if j != 0}
    for (i, j), vid in y.items():
        model.add_constraint({vid: 1.0, x[i, j]: -(n - 1.0)}, "<=", 0.0, "sc_cap")
    terms = {y[0, j]: 1.0 for j in range(1, n)}
    rhs = sum(vis[i].move(terms, -1.0) for i in range(1, n))
    model.add_constraint(terms, "=", rhs, "sc_source")
    for i in range(1, n):
        terms = {}
        for j in range(n):
            if j != i:
                terms[y[j, i]] = terms.get(y[j, i], 0.0) + 1.0
                if j != 0:
                    terms[y[i, j]] = terms.get(y[i, j], 0.0) - 1.0
        model.add_constraint(terms, "=", vis[i].move(terms, -1.0), "sc_balance")


def _two_commodity(model, index, pt, x, vis, n, partial):
    # y carries remaining deliveries outward, z the served count back home
    y = {a: new_var(model, index, ("y",) + pt + a) for a in x}
    z = {a: new_var(model, index, ("z",) + pt + a) for a in x}
    for a in x:
        sense = "<=" if partial else "="
        model.add_constraint({y[a]: 1.0, z[a]: 1.0, x[a]: -(n - 1.0)}, sense, 0.0, "2c_arc")
    for sym, flow, sign in (("y", y, 1.0), ("z", z, -1.0)):
        terms = {}
        for j in range(1, n):
            terms[flow[0, j]] = 1.0
            terms[flow[j, 0]] = -1.0
        rhs = sum(vis[i].move(terms, -sign) for i in range(1, n))
        model.add_constraint(terms, "=", rhs, f"2c_{sym}_source")
        for i in range(1, n):
            terms = {}
            for j in range(n):
                if j != i:
                    terms[flow[i, j]] = terms.get(flow[i, j], 0.0) + 1.0
                    terms[flow[j, i]] = terms.get(flow[j, i], 0.0) - 1.0
            model.add_constraint(terms, "=", vis[i].move(terms, sign), f"2c_{sym}_balance")
    for i in range(n):
        terms = {}
        for j in range(n):
            if j != i:
                terms[y[i, j]] = 1.0
                terms[z[i, j]] = 1.0
        rhs = vis[i].move(terms, -(n - 1.0))
        model.add_constraint(terms, "<=" if partial else "=", rhs, "2c_node")


def add_lifted_inequalities(model: Model, x: dict, u: dict, n: int, families) -> None:
    """Add the lifted sequence inequalities over triples of non-depot nodes.

    Coefficients use ``R = n`` (number of routing nodes, depot included).
    """
    fam = set(families)
    if not fam:
        return
    R = float(n)
    nodes = range(1, n)
    if Ineq.THREE_CLQ in fam:
        for i, j, k in itertools.combinations(nodes, 3):
            terms = {x[a, b]: 4 * R - 10 for a, b in itertools.permutations((i, j, k), 2)}
            model.add_constraint(terms, "<=", 8 * R - 20, "3clq")
    if Ineq.NR in fam:
        for i, j, k in itertools.permutations(nodes, 3):
            terms = _combine(
                (u[i], 1.0), (u[k], -1.0),
                (x[i, j], R - 1), (x[j, k], R - 1),
                (x[k, j], R - 3), (x[j, i], R - 3),
                (x[i, k], R), (x[k, i], R - 4))
            model.add_constraint(terms, "<=", 2 * R - 4, "nr")
    if Ineq.R in fam:
        # symmetric in (j, k): one row per apex i and unordered pair
        for i in nodes:
            for j, k in itertools.combinations([a for a in nodes if a != i], 2):
                terms = _combine(
                    (u[i], 2.0), (u[j], -1.0), (u[k], -1.0),
                    (x[i, j], 2 * R - 2), (x[i, k], 2 * R - 2),
                    (x[j, i], 2 * R - 8), (x[k, i], 2 * R - 8),
                    (x[j, k], 2 * R - 5), (x[k, j], 2 * R - 5))
                model.add_constraint(terms, "<=", 4 * R - 10, "r")
    if Ineq.TWO_P in fam:
        for i, j, k in itertools.permutations(nodes, 3):
            terms = _combine(
                (u[i], 1.0), (u[k], -1.0),
                (x[i, k], 2 * R - 3), (x[k, i], R - 4),
                (x[i, j], R - 1), (x[j, k], R - 1))
            model.add_constraint(terms, "<=", 2 * R - 4, "2p_a")
            terms = _combine(
                (u[k], 1.0), (u[i], -1.0),
                (x[i, k], 2 * R - 7), (x[k, i], R - 1),
                (x[i, j], R - 4), (x[j, k], R - 4))
            model.add_constraint(terms, "<=", 2 * R - 6, "2p_b")
    if Ineq.L3 in fam:
        for i, j, k in itertools.permutations(nodes, 3):
            terms = _combine(
                (x[i, k], 4 * R - 10), (x[k, i], 2 * R - 5),
                (x[i, j], 2 * R - 5), (x[j, k], 2 * R - 5))
            model.add_constraint(terms, "<=", 4 * R - 10, "l3")


def _combine(*pairs) -> dict[int, float]:
    out: dict[int, float] = {}
    for vid, coef in pairs:
        out[vid] = out.get(vid, 0.0) + coef
    return out


def build_tsp(dist, variant: TspVariant | str, name: str | None = None) -> tuple[Model, VarIndex]:
    """Standalone TSP over all nodes of ``dist`` (node 0 is the depot)."""
    if not isinstance(variant, TspVariant):
        variant = TspVariant.parse(variant)
    model = Model(name or f"tsp_{variant.name}")
    index = VarIndex()
    add_routing_block(model, index, dist, variant)
    return model.freeze(), index
