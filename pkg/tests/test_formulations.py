import itertools
import math

import numpy as np
import pytest

from irpbench.expkit import suites
from irpbench.formulations import (BASE_SPECS, BEKTAS_COLUMNS, FormulationSpec, Ineq,
                                   InventoryVariant, TspBase, TspVariant, all_specs, build_irp,
                                   build_tsp, build_wagner_whitin_milp, build_wagner_whitin_sp,
                                   decode_irp, encode_plan, find_subtours, trivial_start)
from irpbench.instance import IrpInstance, distance_matrix, generate_random
from irpbench.milp import check_feasible, lp_relaxation
from irpbench.oracles import brute_force_irp, wagner_whitin_dp
from irpbench.solver import solve_lp, solve_mip

TSP_NAMES = [b.value for b in TspBase] + list(BEKTAS_COLUMNS)


# -- names -------------------------------------------------------------------

def test_variant_names_round_trip():
    for name in TSP_NAMES:
        v = TspVariant.parse(name)
        assert TspVariant.parse(v.name) == v
    assert TspVariant.parse("R+2P") == TspVariant(TspBase.DL, {Ineq.R, Ineq.TWO_P})
    assert TspVariant.parse("MTZ+2CLQ").base is TspBase.MTZ_2CLQ
    assert FormulationSpec.parse("CMILP+DL+3CLQ").name == "CMILP+DL+3CLQ"
    assert len(BASE_SPECS) == 10 and len(all_specs()) == 28


def test_flow_variants_reject_lifted_sets():
    for base in (TspBase.SC, TspBase.TWO_C):
        with pytest.raises(ValueError):
            TspVariant(base, {Ineq.NR})


def test_bad_names():
    for bad in ("", "DL+XYZ"):
        with pytest.raises(ValueError):
            TspVariant.parse(bad)
    for bad in ("DL", "FOO+DL"):
        with pytest.raises(ValueError):
            FormulationSpec.parse(bad)


# -- TSP ---------------------------------------------------------------------

def _tour_values(model, index, order):
    """Columns of a tour ``(0, a, b, ..., 0)`` for any routing variant."""
    n = len(order) - 1
    vals = np.zeros(model.num_vars)
    pos = {node: p for p, node in enumerate(order[:-1])}
    for a, b in zip(order, order[1:]):
        vals[index[("x", a, b)]] = 1
        if ("y", a, b) in index:
            vals[index[("y", a, b)]] = n - 1 - pos[a]
        if ("z", a, b) in index:
            vals[index[("z", a, b)]] = pos[a]
    for node in range(1, n):
        if ("u", node) in index:
            vals[index[("u", node)]] = pos[node]
    return vals


@pytest.mark.parametrize("name", TSP_NAMES)
def test_three_nodes_any_variant(name):
    d = np.array([[0, 3, 4], [3, 0, 5], [4, 5, 0]], dtype=float)
    assert solve_mip(build_tsp(d, name)[0]).incumbent == pytest.approx(12.0)


@pytest.mark.parametrize("name", TSP_NAMES)
def test_cyclic_and_euclidean_examples(name, frozen):
    cyc = np.array([[min(abs(i - j), 4 - abs(i - j)) for j in range(4)] for i in range(4)], float)
    assert solve_mip(build_tsp(cyc, name)[0]).incumbent == pytest.approx(frozen["tsp_cyclic4"])
    e7 = frozen["tsp_euclid7"]
    dist = distance_matrix(np.array(e7["points"]))
    model, index = build_tsp(dist, name)
    res = solve_mip(model)
    assert res.incumbent == pytest.approx(e7["cost"], rel=1e-9)
    arcs = [(a, b) for a in range(7) for b in range(7) if a != b
            and res.solution[index[("x", a, b)]] > 0.5]
    cycles = find_subtours(arcs)
    assert len(cycles) == 1 and len(cycles[0]) == 8


@pytest.mark.parametrize("n", [4, 5, 6])
def test_every_tour_satisfies_every_family(n):
    dist = np.arange(n * n, dtype=float).reshape(n, n)
    models = [build_tsp(dist, name) for name in TSP_NAMES]
    for perm in itertools.permutations(range(1, n)):
        order = (0,) + perm + (0,)
        for model, index in models:
            assert check_feasible(model, _tour_values(model, index, order)) == [], model.name


def test_subtours_are_cut_off():
    n = 6
    dist = np.ones((n, n)) - np.eye(n)
    for name in TSP_NAMES:
        model, index = build_tsp(dist, name)
        vals = np.zeros(model.num_vars)
        for a, b in ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)):
            vals[index[("x", a, b)]] = 1
        # no choice of the continuous columns can make two cycles feasible
        fixed = lp_relaxation(model).copy()
        for vid, val in enumerate(vals):
            if model.vars[vid].is_integer:
                fixed.vars[vid] = type(fixed.vars[vid])(fixed.vars[vid].name, val, val)
        assert solve_lp(fixed).status == "infeasible", name


def test_lifted_family_counts():
    n = 6
    k = n - 1
    model, _ = build_tsp(np.ones((n, n)) - np.eye(n), "DL+3CLQ+NR+R+L3+2P")
    counts = model.tag_counts()
    perms = k * (k - 1) * (k - 2)
    assert counts["3clq"] == math.comb(k, 3)
    assert counts["nr"] == perms and counts["l3"] == perms
    assert counts["2p_a"] == counts["2p_b"] == perms
    assert counts["r"] == k * math.comb(k - 1, 2)
    assert counts["dl"] == k * (k - 1)
    small, _ = build_tsp(np.ones((4, 4)) - np.eye(4), "MTZ+2CLQ")
    assert small.tag_counts()["2clq"] == 3


def test_flow_row_counts():
    n = 5
    sc = build_tsp(np.ones((n, n)) - np.eye(n), "SC")[0].tag_counts()
    assert sc["sc_cap"] == (n - 1) ** 2 and sc["sc_balance"] == n - 1 and sc["sc_source"] == 1
    tc = build_tsp(np.ones((n, n)) - np.eye(n), "2C")[0].tag_counts()
    assert tc["2c_arc"] == n * (n - 1) and tc["2c_node"] == n
    assert tc["2c_y_balance"] == tc["2c_z_balance"] == n - 1


def test_lifted_sets_tighten_dl_on_five_nodes():
    dist = suites.tsp_case(2)
    assert len(dist) == 5
    base = solve_lp(lp_relaxation(build_tsp(dist, "DL")[0])).objective
    for fam in ("3CLQ", "NR", "R", "2P", "L3"):
        assert solve_lp(lp_relaxation(build_tsp(dist, f"DL+{fam}")[0])).objective >= base - 1e-9


def test_tsp_rejects_bad_matrix():
    with pytest.raises(ValueError):
        build_tsp(np.zeros((1, 1)), "DL")
    with pytest.raises(ValueError):
        build_tsp(np.zeros((2, 3)), "DL")


# -- lot sizing ----------------------------------------------------------------

def test_ww_milp_examples():
    assert solve_mip(build_wagner_whitin_milp([10, 20], 10, 1)[0]).incumbent == pytest.approx(20)
    assert solve_mip(build_wagner_whitin_milp([10, 20], 100, 1)[0]).incumbent == pytest.approx(120)
    model, index = build_wagner_whitin_milp([0, 0, 0], 10, 1)
    res = solve_mip(model)
    assert res.incumbent == 0
    assert all(res.solution[index[("delta", t)]] == 0 for t in (1, 2, 3))
    with pytest.raises(ValueError):
        build_wagner_whitin_milp([1, -2], 1, 1)


def test_sp_examples():
    model, index = build_wagner_whitin_sp([10, 20], 10, 1)
    sol = solve_lp(model)
    assert sol.objective == pytest.approx(20)
    assert sol.values[index[("w", 1, 2)]] == pytest.approx(1)
    assert sol.values[index[("w", 2, 3)]] == pytest.approx(1)
    model, index = build_wagner_whitin_sp([5], 7, 1)
    sol = solve_lp(model)
    assert sol.objective == pytest.approx(7) and sol.values[index[("w", 1, 2)]] == 1


def test_sp_matches_dp_and_is_integral():
    for case in suites.lot_sizing_suite()[:60]:
        sol = solve_lp(build_wagner_whitin_sp(case.demand, case.K, case.h)[0])
        ref = wagner_whitin_dp(case.demand, case.K, case.h).cost
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        assert np.all(np.minimum(np.abs(sol.values), np.abs(sol.values - 1)) <= 1e-6)


# -- IRP -------------------------------------------------------------------------

SPEC_NAMES = [s.name for s in all_specs()]


@pytest.mark.parametrize("spec", [s.name for s in BASE_SPECS])
def test_ten_combinations_agree(spec, frozen):
    inst = generate_random(11, 3, 2)
    res = solve_mip(build_irp(inst, spec)[0])
    assert res.incumbent == pytest.approx(frozen["irp_r3_n2_seed11"], rel=1e-9)


@pytest.mark.parametrize("spec", SPEC_NAMES)
def test_single_retailer_is_lot_sizing(spec):
    inst = generate_random(3, 1, 4)
    K = inst.ordering[0] + 2 * inst.dist[0, 1] + inst.dispatch
    ref = wagner_whitin_dp(inst.demand[:, 0], K, inst.holding[0]).cost
    assert solve_mip(build_irp(inst, spec)[0]).incumbent == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("spec", [s.name for s in BASE_SPECS])
def test_zero_demand_costs_nothing(spec):
    inst = IrpInstance("z", demand=np.zeros((2, 2)), holding=[1, 2], ordering=[3, 4], dispatch=5,
                       dist=np.ones((3, 3)) - np.eye(3))
    model, index = build_irp(inst, spec)
    res = solve_mip(model)
    assert res.incumbent == 0
    assert not decode_irp(inst, index, res.solution).plan.delta.any()


@pytest.mark.parametrize("spec", SPEC_NAMES)
def test_encoded_optimal_plan_is_feasible_and_priced(spec):
    for seed in (0, 1):
        inst = generate_random(seed, 3, 3)
        ref = brute_force_irp(inst)
        model, index = build_irp(inst, spec)
        vals = encode_plan(inst, spec, model, index, ref.delta, ref.routes)
        assert check_feasible(model, vals) == []
        assert model.objective_value(vals) == pytest.approx(ref.total_cost, rel=1e-9)
        start = trivial_start(inst, spec, model, index)
        assert check_feasible(model, start) == []


@pytest.mark.parametrize("spec", [s.name for s in BASE_SPECS])
def test_decoded_solution_is_consistent(spec):
    inst = generate_random(8, 3, 3)
    model, index = build_irp(inst, spec)
    res = solve_mip(model)
    dec = decode_irp(inst, index, res.solution, model)
    assert not dec.has_subtours
    assert dec.plan.total_cost == pytest.approx(dec.model_cost, abs=1e-6)
    assert dec.model_cost == pytest.approx(res.incumbent, abs=1e-6)
    for t, route in enumerate(dec.plan.routes):
        assert sorted(route[1:-1]) == [i + 1 for i in np.flatnonzero(dec.plan.delta[t])]
    stock = np.cumsum(dec.plan.quantities - inst.demand, axis=0)
    assert np.all(stock >= -1e-6) and np.allclose(stock[-1], 0, atol=1e-6)


def test_encode_rejects_stockout():
    inst = generate_random(0, 2, 2)
    model, index = build_irp(inst, "CMILP+DL")
    with pytest.raises(ValueError):
        encode_plan(inst, "CMILP+DL", model, index, np.zeros((2, 2), dtype=int))


def test_find_subtours():
    assert find_subtours([(0, 1), (1, 0)]) == [(0, 1, 0)]
    cycles = find_subtours([(2, 3), (0, 1), (3, 2), (1, 0)])
    assert cycles == [(0, 1, 0), (2, 3, 2)]
    assert find_subtours([]) == []


def test_irp_tag_counts_per_period():
    r, n_per = 4, 3
    model, _ = build_irp(generate_random(0, r, n_per), "CMILP+MTZ")
    c = model.tag_counts()
    assert c["mtz"] == n_per * r * (r - 1)
    assert c["assign_out"] == c["assign_in"] == n_per * (r + 1)
    assert c["dispatch_link"] == n_per * r
    assert c["ww_balance"] == c["ww_setup"] == n_per * r
    sp = build_irp(generate_random(0, r, n_per), "SP+SC")[0].tag_counts()
    assert sp["sp_link"] == n_per * r and sp["sp_flow"] == (n_per + 1) * r


def test_sp_inventory_variant_has_no_stock_columns():
    model, index = build_irp(generate_random(0, 2, 2), FormulationSpec(InventoryVariant.SP,
                                                                       TspVariant(TspBase.DL)))
    assert not index.keys("I") and index.keys("w")
