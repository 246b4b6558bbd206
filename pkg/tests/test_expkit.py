import csv
import math

import numpy as np
import pytest

from irpbench.expkit import (AGG_HEADER, CSV_HEADER, ExperimentPlan, PlanError, ResultRow,
                            aggregate_rows, emit_pattern_data, run_plan, write_rows)
from irpbench.instance import PatternKind, default_pattern, generate_random, save_instance
from irpbench.oracles import brute_force_irp
from irpbench.solver import SolverConfig


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_empty_formulation_list_rejected():
    with pytest.raises(PlanError):
        ExperimentPlan(formulations=())


@pytest.mark.parametrize("kwargs", [
    {"formulations": ("CMILP+FOO",)},
    {"formulations": ("CMILP+DL",), "seeds": (1, 1)},
    {"formulations": ("CMILP+DL",), "modes": ("QP",)},
    {"formulations": ("CMILP+DL",), "source": "design2", "scenarios": (19,)},
    {"formulations": ("CMILP+DL",), "source": "files"},
    {"formulations": ("CMILP+DL",), "retailers": (20,)},
    {"formulations": ("CMILP+DL",), "source": "design2", "scenarios": (1,)},
])
def test_invalid_plans(kwargs):
    with pytest.raises(PlanError):
        ExperimentPlan(**kwargs)


def test_full_scale_unlocks_large_plans():
    plan = ExperimentPlan(formulations=("CMILP+DL",), retailers=(20,), full_scale=True)
    assert plan.retailers == (20,)


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    plan = ExperimentPlan(formulations=("CMILP+DL",), retailers=(2,), periods=(2,), seeds=(0,))
    with pytest.raises(PlanError):
        run_plan(plan, blocker / "sub")


def test_run_plan_rows_match_oracle(tmp_path):
    plan = ExperimentPlan(formulations=("CMILP+MTZ", "SP+SC"), retailers=(2, 3), periods=(2,),
                          seeds=(0, 1), modes=("MIP", "LP"), timing=False)
    paths = run_plan(plan, tmp_path)
    mip = _read(paths["results_mip"])
    assert tuple(mip[0]) == CSV_HEADER and len(mip) == 1 + 2 * 2 * 2
    for row in mip[1:]:
        inst = generate_random(int(row[0].split("-s")[-1]), int(row[0].split("-r")[1][0]), 2)
        assert row[6] == "optimal" and row[3] == "NA"
        assert float(row[5]) == pytest.approx(brute_force_irp(inst).total_cost, abs=1e-5)
    lp = _read(paths["results_lp"])
    assert all(float(r[4]) >= -1e-6 for r in lp[1:])
    agg = _read(paths["aggregate"])
    assert tuple(agg[0]) == AGG_HEADER and len(agg) == 1 + 2 * 2 * 2


def test_aggregate_is_mean_of_members(tmp_path):
    plan = ExperimentPlan(formulations=("CMILP+DL",), retailers=(2,), periods=(2, 3),
                          seeds=(0, 1, 2), modes=("MIP",))
    paths = run_plan(plan, tmp_path)
    rows = _read(paths["results_mip"])[1:]
    for g in _read(paths["aggregate"])[1:]:
        members = [r for r in rows if f"-N{g[2]}-r{g[3]}-" in r[0]]
        assert int(g[4]) == len(members) == 3
        for col, k in (("best", 5), ("time_sec", 3)):
            mean = math.fsum(float(m[k]) for m in members) / 3
            assert float(g[AGG_HEADER.index(col)]) == pytest.approx(mean, abs=1e-3)


def test_aggregate_rows_exact():
    rows = [ResultRow("a", "F", "MIP", 1.0, 0.0, 10.0, "optimal", 2, 3),
            ResultRow("b", "F", "MIP", 2.0, 1.0, 13.0, "time_limit", 2, 3),
            ResultRow("c", "F", "MIP", None, None, None, "error:X", 3, 3)]
    agg = aggregate_rows(rows)
    assert agg[0]["count"] == 2 and agg[0]["best"] == 11.5 and agg[0]["time_sec"] == 1.5
    assert agg[1]["best"] is None


def test_same_plan_twice_identical(tmp_path):
    plan = ExperimentPlan(formulations=("CMILP+DL", "SP+2C"), retailers=(3,), periods=(2,),
                          seeds=(0, 1), modes=("MIP", "LP"), timing=False)
    a, b = run_plan(plan, tmp_path / "a"), run_plan(plan, tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()


def test_workers_keep_plan_order(tmp_path):
    kw = dict(formulations=("CMILP+DL", "SP+MTZ"), retailers=(2,), periods=(2,), seeds=(0, 1),
              timing=False)
    a = run_plan(ExperimentPlan(**kw), tmp_path / "a")
    b = run_plan(ExperimentPlan(workers=2, **kw), tmp_path / "b")
    assert a["results_mip"].read_bytes() == b["results_mip"].read_bytes()


@pytest.mark.slow
def test_design2_shrunk_example(tmp_path):
    plan = ExperimentPlan(formulations=("CMILP+SC",), source="design2", scenarios=(1, 2, 3),
                          d2_retailers=4, d2_periods=5, seeds=(0,),
                          config=SolverConfig(time_limit=300.0))
    rows = _read(run_plan(plan, tmp_path)["results_mip"])[1:]
    assert len(rows) == 3 and all(r[6] == "optimal" for r in rows)


def test_files_source(tmp_path):
    inst = generate_random(4, 2, 2)
    save_instance(inst, tmp_path / "i.txt")
    plan = ExperimentPlan(formulations=("SP+DL",), source="files", files=(str(tmp_path / "i.txt"),))
    rows = _read(run_plan(plan, tmp_path)["results_mip"])[1:]
    assert rows[0][0] == inst.name
    assert float(rows[0][5]) == pytest.approx(brute_force_irp(inst).total_cost, abs=1e-5)


def test_write_rows_formats(tmp_path):
    path = write_rows([ResultRow("i", "F", "MIP", None, math.inf, 1.5, "time_limit")],
                      tmp_path / "r.csv")
    assert path.read_text() == ",".join(CSV_HEADER) + "\ni,F,MIP,NA,inf,1.500000,time_limit\n"


def test_pattern_data_examples(tmp_path):
    rows = _read(emit_pattern_data(["STA"], 3, tmp_path / "sta.csv"))
    assert rows == [["period", "STA"], ["1", "100"], ["2", "100"], ["3", "100"]]
    rows = _read(emit_pattern_data(list(PatternKind), 15, tmp_path / "all.csv"))
    assert len(rows) == 16 and all(len(r) == 7 for r in rows)
    cols = {name: np.array([float(r[k]) for r in rows[1:]]) for k, name in enumerate(rows[0])}
    assert np.argmax(cols["SIN1"]) != np.argmax(cols["SIN2"])


def test_pattern_data_duplicate_names(tmp_path):
    rows = _read(emit_pattern_data([default_pattern("RAND", 1), default_pattern("RAND", 2)], 4,
                                   tmp_path / "r.csv"))
    assert rows[0] == ["period", "RAND", "RAND_2"]
    with pytest.raises(ValueError):
        emit_pattern_data([], 4, tmp_path / "none.csv")
