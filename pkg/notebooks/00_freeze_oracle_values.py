"""
Freezing reference values
=========================

Every reference number the tests compare against is computed twice here:
once with the package oracles (Held-Karp, the lot-sizing recursion,
enumeration of visit matrices) and once with deliberately naive code written
below (all permutations, all order plans, stock simulated period by
period).  Only values on which both agree are written to
``tests/data/oracle_values.json``.

Run from the repository root::

    python3 notebooks/00_freeze_oracle_values.py
"""

# %%
import itertools
import json
import math
from pathlib import Path

import numpy as np

from irpbench.expkit import suites
from irpbench.instance import distance_matrix, generate_random, make_rng
from irpbench.oracles import brute_force_irp, held_karp_tsp, wagner_whitin_dp

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "oracle_values.json"


def close(a, b):
    return abs(a - b) <= 1e-9 * max(1.0, abs(b))


# %% [markdown]
# Naive tour: fix node 0 first and try every order of the rest.

# %%
def naive_tour(dist):
    n = len(dist)
    if n == 1:
        return 0.0
    best = math.inf
    for perm in itertools.permutations(range(1, n)):
        seq = (0,) + perm + (0,)
        best = min(best, math.fsum(dist[a][b] for a, b in zip(seq, seq[1:])))
    return best


# %% [markdown]
# Naive lot sizing: every subset of order periods, stock simulated forward.
# An order delivers exactly the demand up to the next order.

# %%
def naive_series_cost(demand, orders, K, h):
    n = len(demand)
    stock, cost = 0.0, 0.0
    for t in range(n):
        if orders[t]:
            nxt = next((s for s in range(t + 1, n) if orders[s]), n)
            stock += sum(demand[t:nxt])
            cost += K
        stock -= demand[t]
        if stock < -1e-12:
            return math.inf
        cost += h * stock
    return cost


def naive_lot_sizing(demand, K, h):
    return min(naive_series_cost(demand, pat, K, h)
               for pat in itertools.product((0, 1), repeat=len(demand)))


# %% [markdown]
# Naive IRP: every visit matrix, per-retailer simulation, permutation routes.

# %%
def naive_irp(inst):
    N, r = inst.num_periods, inst.num_retailers
    d = inst.demand.tolist()
    route_cache = {}

    def route(visited):
        if visited not in route_cache:
            nodes = (0,) + visited
            sub = [[inst.dist[a][b] for b in nodes] for a in nodes]
            route_cache[visited] = naive_tour(sub) if visited else 0.0
        return route_cache[visited]

    best = math.inf
    for bits in itertools.product((0, 1), repeat=N * r):
        delta = np.array(bits).reshape(N, r)
        total = 0.0
        for i in range(r):
            total += naive_series_cost([d[t][i] for t in range(N)], delta[:, i],
                                       inst.ordering[i], inst.holding[i])
        if total == math.inf:
            continue
        for t in range(N):
            visited = tuple(i + 1 for i in range(r) if delta[t, i])
            if visited:
                total += route(visited) + inst.dispatch
        best = min(best, total)
    return best


# %% [markdown]
# Single examples.

# %%
values = {}

cyclic4 = [[min(abs(i - j), 4 - abs(i - j)) for j in range(4)] for i in range(4)]
hk = held_karp_tsp(np.array(cyclic4, dtype=float)).cost
assert close(hk, naive_tour(cyclic4))
values["tsp_cyclic4"] = hk

pts7 = make_rng(7).integers(0, 100, size=(7, 2), endpoint=True)
d7 = distance_matrix(pts7)
hk = held_karp_tsp(d7).cost
assert close(hk, naive_tour(d7.tolist()))
values["tsp_euclid7"] = {"points": pts7.tolist(), "cost": hk}

for name, (dem, K, h) in {"ww_10_20_K10": ([10, 20], 10, 1), "ww_10_20_K100": ([10, 20], 100, 1),
                          "ww_zero": ([0, 0, 0], 10, 1)}.items():
    c = wagner_whitin_dp(dem, K, h).cost
    assert close(c, naive_lot_sizing(dem, K, h))
    values[name] = c

small = generate_random(11, 3, 2)
bf = brute_force_irp(small).total_cost
assert close(bf, naive_irp(small))
values["irp_r3_n2_seed11"] = bf

# %% [markdown]
# Suites.

# %%
tsp_costs = []
for dist in suites.tsp_suite():
    hk = held_karp_tsp(dist).cost
    assert close(hk, naive_tour(dist.tolist()))
    tsp_costs.append(hk)
values["tsp_suite"] = tsp_costs

ww_costs = []
for case in suites.lot_sizing_suite():
    c = wagner_whitin_dp(case.demand, case.K, case.h).cost
    assert close(c, naive_lot_sizing(case.demand, case.K, case.h))
    ww_costs.append(c)
values["lot_sizing_suite"] = ww_costs

for key, insts in (("agreement_suite", suites.agreement_suite()),
                   ("dominance_suite", suites.dominance_suite())):
    costs = []
    for inst in insts:
        bf = brute_force_irp(inst).total_cost
        assert close(bf, naive_irp(inst)), inst.name
        costs.append(bf)
    values[key] = costs

# %%
OUT.parent.mkdir(parents=True, exist_ok=True)
OUT.write_text(json.dumps(values, indent=1, sort_keys=True) + "\n")
print(f"wrote {OUT}")
for key, val in sorted(values.items()):
    print(key, len(val) if isinstance(val, list) else val)
