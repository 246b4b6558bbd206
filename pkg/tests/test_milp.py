import numpy as np
import pytest

from irpbench.formulations import FormulationSpec, build_irp, build_tsp
from irpbench.instance import generate_random
from irpbench.milp import (LinConstraint, MissingValueError, Model, ModelError, VarIndex, VarType,
                           check_feasible, export_lp, export_mps, format_lp, format_mps,
                           lp_relaxation, var_name)



def test_ids_are_dense():
    m = Model()
    ids = [m.add_var(f"v{k}") for k in range(100)]
    assert ids == list(range(100))


def test_constraint_on_binary_accepted():
    m = Model()
    x = m.add_var("x", vtype=VarType.BINARY)
    assert m.add_constraint({x: 1}, "<=", 1) == 0


def test_unknown_variable_rejected():
    with pytest.raises(ModelError):
        Model().add_constraint({999: 1.0}, "<=", 1)


def test_duplicate_name_rejected():
    m = Model()
    m.add_var("x")
    with pytest.raises(ModelError):
        m.add_var("x")


def test_bad_bounds_rejected():
    with pytest.raises(ModelError):
        Model().add_var("x", lo=2, hi=1)


def test_terms_are_merged():
    c = LinConstraint.build([(1, 2.0), (0, 1.0), (1, -0.5)], "<=", 3)
    assert c.terms == ((0, 1.0), (1, 1.5))


def test_frozen_model_is_read_only():
    m = Model()
    m.add_var("x")
    m.freeze()
    with pytest.raises(ModelError):
        m.add_var("y")


def test_lp_relaxation():
    m = Model()
    for k in range(3):
        m.add_var(f"b{k}", vtype=VarType.BINARY)
    m.add_var("c", hi=5)
    m.add_constraint({0: 1, 1: 1, 2: 1}, "<=", 2)
    r = lp_relaxation(m)
    assert r.integer_ids() == [] and r.num_constraints == m.num_constraints
    assert all(v.lo == 0 and v.hi == 1 for v in r.vars[:3])
    assert m.integer_ids() == [0, 1, 2]       # original untouched
    rr = lp_relaxation(r)
    assert rr.vars == r.vars and rr.constraints == r.constraints
    cont = Model()
    cont.add_var("y", lo=-1, hi=2)
    assert lp_relaxation(cont).vars == cont.vars


def test_check_feasible_examples():
    m = Model()
    m.add_var("x", vtype=VarType.BINARY)
    assert [v.kind for v in check_feasible(m, [0.5])] == ["integrality"]
    assert check_feasible(lp_relaxation(m), [0.5]) == []
    m2 = Model()
    y = m2.add_var("y")
    m2.add_constraint({y: 1}, "<=", 1, "cap")
    assert check_feasible(m2, [1 + 1e-9], tol=1e-6) == []
    rep = check_feasible(m2, [1.1])
    assert rep[0].kind == "constraint" and rep[0].label == "cap"
    with pytest.raises(MissingValueError):
        check_feasible(m2, [])
    assert check_feasible(m2, {"y": 0.5}) == []


def test_var_name_scheme():
    assert var_name("x", 1, 0, 2) == "x(1,0,2)"
    assert var_name("D") == "D"


def test_var_index_bijective():
    idx = VarIndex()
    idx.add(("x", 1, 2), 0)
    with pytest.raises(ValueError):
        idx.add(("x", 1, 2), 1)
    with pytest.raises(ValueError):
        idx.add(("y",), 0)
    assert idx.key(0) == ("x", 1, 2) and idx[("x", 1, 2)] == 0


def _one_var():
    m = Model("one")
    m.add_var("x", obj=1.0)
    return m


def test_lp_golden():
    text = format_lp(_one_var())[0]
    assert text == ("\\ Model: one\n\\ Generated by irpbench\nMinimize\n obj: x\n"
                    "Subject To\nBounds\nEnd\n")
    for section in ("Minimize", "Bounds", "End"):
        assert section in text


def test_mps_golden():
    assert format_mps(_one_var())[0] == (
        "NAME          one\nROWS\n N  OBJ\nCOLUMNS\n    C0000000  OBJ                  1\n"
        "RHS\nBOUNDS\nENDATA\n")


def test_lp_sections_and_binaries():
    m = Model("two")
    x = m.add_var("x(1,2)", vtype="binary", obj=2.5)
    y = m.add_var("y", lo=-1, hi=4, obj=-1)
    m.add_constraint({x: 1, y: 2}, ">=", 1, "c")
    text = format_lp(m)[0]
    assert " c_0: x(1,2) + 2 y >= 1" in text
    assert "Binaries\n x(1,2)\n" in text and " -1 <= y <= 4" in text


def test_export_deterministic_with_map(tmp_path):
    model, index = build_irp(generate_random(1, 3, 2), "SP+2C")
    for ext, fn in (("lp", export_lp), ("mps", export_mps)):
        a, b = tmp_path / f"a.{ext}", tmp_path / f"b.{ext}"
        map_a = fn(model, a, index)
        fn(model, b, index)
        assert a.read_bytes() == b.read_bytes()
        lines = map_a.read_text().splitlines()
        assert len(lines) == 1 + model.num_vars + model.num_constraints
        assert "('x', 1, 0, 1)" in map_a.read_text()


def test_mps_names_are_short(tmp_path):
    model, _ = build_tsp([[0, 1, 2], [1, 0, 1], [2, 1, 0]], "DL")
    text = format_mps(model)[0]
    for line in text.splitlines():
        if line.startswith("    C"):
            assert len(line.split()[0]) <= 8


@pytest.mark.parametrize("spec", ["CMILP+SC", "SP+DL+NR+R+2P", "CMILP+2C"])
def test_exports_reimport_with_external_solver(tmp_path, spec):
    hs = pytest.importorskip("highspy")
    from irpbench.oracles import brute_force_irp

    inst = generate_random(4, 3, 2)
    model, _ = build_irp(inst, spec)
    ref = brute_force_irp(inst).total_cost
    for ext, fn in (("lp", export_lp), ("mps", export_mps)):
        path = tmp_path / f"m.{ext}"
        fn(model, path)
        h = hs.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(str(path))
        h.run()
        assert h.getInfo().objective_function_value == pytest.approx(ref, rel=1e-9)


def test_tag_counts_closed_form():
    n = 6
    model, _ = build_tsp([[abs(i - j) for j in range(n)] for i in range(n)], "MTZ+2CLQ")
    counts = model.tag_counts()
    assert counts["mtz"] == (n - 1) * (n - 2)
    assert counts["2clq"] == (n - 1) * (n - 2) // 2
    assert counts["assign_out"] == counts["assign_in"] == n


def test_relaxation_never_adds_violations():
    model, _ = build_irp(generate_random(2, 2, 2), FormulationSpec.parse("CMILP+DL"))
    rng = np.random.default_rng(0)
    for _ in range(20):
        vals = rng.uniform(0, 2, model.num_vars)
        strict = {(v.kind, v.index) for v in check_feasible(model, vals)}
        relaxed = {(v.kind, v.index) for v in check_feasible(lp_relaxation(model), vals)}
        assert relaxed <= strict
