import math

import numpy as np
import pytest

from irpbench.instance import (DemandPattern, InstanceFormatError, IrpInstance, PatternKind,
                               ScenarioSpec, default_pattern, distance_matrix, euclidean_distance,
                               format_instance, generate_design1, generate_design2,
                               generate_pattern, generate_random, load_instance, load_layout,
                               parse_instance, save_instance)


def test_euclidean_distance_examples():
    assert euclidean_distance((0, 0), (3, 4)) == 5.0
    assert euclidean_distance((7, 7), (7, 7)) == 0.0
    assert euclidean_distance((0, 0), (1, 1)) == pytest.approx(1.41421356, abs=1e-8)


def test_design1_ranges_and_constants():
    inst = generate_design1(1, 3, 5)
    assert inst.num_periods == 3 and inst.num_retailers == 5
    assert inst.demand.min() >= 10 and inst.demand.max() <= 100
    assert np.all((inst.holding >= 0.01) & (inst.holding <= 0.05))
    assert np.all(inst.ordering == 10) and inst.dispatch == 0
    # one draw per retailer, repeated in every period
    assert np.all(inst.demand == inst.demand[0])


def test_design1_determinism_and_seed_sensitivity():
    a, b = generate_design1(1, 3, 5), generate_design1(1, 3, 5)
    assert a == b and format_instance(a) == format_instance(b)
    assert generate_design1(2, 3, 5) != a


def test_design1_marginals_over_many_retailers():
    demand, holding, coords = [], [], []
    for seed in range(40):
        inst = generate_design1(seed, 3, 30)
        demand.append(inst.demand[0])
        holding.append(inst.holding)
        coords.append(inst.coords)
    demand, holding, coords = map(np.concatenate, (demand, holding, coords))
    assert demand.size >= 1000
    assert demand.min() >= 10 and demand.max() <= 100
    assert holding.min() >= 0.01 and holding.max() <= 0.05
    assert coords.min() >= 0 and coords.max() <= 500
    assert 50 <= demand.mean() <= 60


def test_design1_rejects_bad_sizes():
    with pytest.raises(ValueError):
        generate_design1(0, 0, 5)
    with pytest.raises(ValueError):
        generate_design1(0, 4, 5, strict=True)
    generate_design1(0, 6, 30, strict=True)


def test_distance_matrix_triangle_inequality():
    d = generate_design1(3, 3, 12).dist
    assert np.allclose(d, d.T) and np.all(np.diag(d) == 0)
    n = len(d)
    for k in range(n):
        assert np.all(d[:, [k]] <= d + d[[k], :] + 1e-9)


@pytest.mark.parametrize("sid, K, D", [(1, 0, 0), (2, 0, 0), (3, 0, 0), (4, 1000, 0), (6, 1000, 0),
                                       (10, 0, 15000), (13, 1000, 15000)])
def test_scenario_table(sid, K, D):
    inst = generate_design2(sid)
    assert inst.num_periods == 15 and inst.num_retailers == 16
    assert np.all(inst.ordering == K)
    assert inst.dispatch == D
    assert np.all(inst.holding == 1)


def test_scenario_mixed_ordering_blocks():
    for sid in (7, 8, 9, 16, 17, 18):
        K = generate_design2(sid).ordering
        assert sorted(K.tolist()) == [500] * 5 + [1000] * 6 + [2000] * 5


def test_scenario_examples():
    s1 = generate_design2(1)
    assert np.all(s1.demand == 100) and s1.dispatch == 0 and np.all(s1.ordering == 0)
    assert generate_design2(10).dispatch == 15000
    assert np.all(generate_design2(4).demand.sum(axis=1) == 1600)


def test_scenario_demand_group_b():
    d = generate_design2(2).demand[0]
    assert sorted(d.tolist()) == [50] * 6 + [75] * 5 + [100] * 5


def test_scenario_group_c_uses_all_patterns():
    spec = ScenarioSpec.from_id(3)
    kinds = {p.kind for p in spec.demand_assignment}
    assert kinds == set(PatternKind)
    assert spec.demand_group == "C"


def test_scenario_id_out_of_range():
    for bad in (0, 19):
        with pytest.raises(ValueError):
            ScenarioSpec.from_id(bad)


def test_design2_shrink():
    inst = generate_design2(5, retailers=4, periods=5)
    assert inst.num_retailers == 4 and inst.num_periods == 5
    full = generate_design2(5)
    assert np.array_equal(inst.dist, full.dist[:5, :5])


def test_layout_has_17_points():
    assert load_layout().shape == (17, 2)


def test_pattern_examples():
    assert generate_pattern(DemandPattern(PatternKind.STA, level=100), 4).tolist() == [100] * 4
    assert generate_pattern(DemandPattern(PatternKind.SIN1, level=100, amplitude=0), 3).tolist() \
        == [100] * 3


@pytest.mark.parametrize("kind", ["LCY1", "LCY2"])
def test_life_cycle_is_unimodal(kind):
    s = generate_pattern(default_pattern(kind), 15)
    peak = int(np.argmax(s))
    assert 0 < peak < 14
    assert np.all(np.diff(s[: peak + 1]) >= 0) and np.all(np.diff(s[peak:]) <= 0)


def test_sin_patterns_differ_in_phase():
    s1 = generate_pattern(default_pattern("SIN1"), 15)
    s2 = generate_pattern(default_pattern("SIN2"), 15)
    assert np.argmax(s1) != np.argmax(s2)


def test_rand_pattern_seeded():
    p = default_pattern("RAND", seed=4)
    a, b = generate_pattern(p, 15), generate_pattern(p, 15)
    assert np.array_equal(a, b) and a.min() >= 50 and a.max() <= 150


def test_pattern_rejects_negative_parameters():
    with pytest.raises(ValueError):
        DemandPattern(PatternKind.SIN1, amplitude=-1)
    with pytest.raises(ValueError):
        DemandPattern(PatternKind.STA, level=-5)


def test_round_trip(tmp_path):
    for inst in (generate_design1(1, 3, 5), generate_design2(8, retailers=5, periods=4),
                 generate_random(9, 3, 2)):
        path = tmp_path / f"{inst.name}.txt"
        save_instance(inst, path)
        back = load_instance(path)
        assert back == inst
        assert format_instance(back) == path.read_text()


def test_round_trip_explicit_distances():
    inst = IrpInstance("asym", demand=[[1, 2]], holding=[1, 2], ordering=[0, 3], dispatch=4,
                       dist=[[0, 1, 2], [3, 0, 4], [5, 6, 0]])
    assert parse_instance(format_instance(inst)) == inst


def test_truncated_file_names_missing_section():
    text = format_instance(generate_design1(1, 3, 5))
    cut = text[: text.index("DEMAND")]
    with pytest.raises(InstanceFormatError, match="DEMAND"):
        parse_instance(cut)


def test_wrong_demand_row_length():
    lines = format_instance(generate_design1(1, 3, 5)).splitlines()
    k = lines.index("DEMAND") + 1
    lines[k] = lines[k] + " 7"
    with pytest.raises(InstanceFormatError, match="dimension"):
        parse_instance("\n".join(lines))


def test_instance_validation():
    with pytest.raises(ValueError):
        IrpInstance("x", demand=[[-1]], holding=[1], ordering=[1], dispatch=0, dist=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        IrpInstance("x", demand=[[1]], holding=[1, 2], ordering=[1], dispatch=0,
                    dist=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        IrpInstance("x", demand=[[1]], holding=[1], ordering=[1], dispatch=math.inf,
                    dist=np.zeros((2, 2)))


def test_instances_are_read_only():
    inst = generate_random(0, 2, 2)
    with pytest.raises(ValueError):
        inst.demand[0, 0] = 5


def test_generate_random_ranges():
    inst = generate_random(5, 4, 3)
    assert inst.demand.min() >= 0 and inst.demand.max() <= 60
    assert np.allclose(inst.dist, distance_matrix(inst.coords))
