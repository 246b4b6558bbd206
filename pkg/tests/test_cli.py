import csv

import pytest

from irpbench.expkit.cli import main, read_config, UsageError
from irpbench.instance import load_instance


def test_gen_build_solve(tmp_path, capsys):
    inst = tmp_path / "i.txt"
    assert main(["gen", "--design", "1", "--seed", "1", "--periods", "3", "--retailers", "5",
                 "--out", str(inst)]) == 0
    assert load_instance(inst).num_retailers == 5
    lp = tmp_path / "m.lp"
    assert main(["build", "--instance", str(inst), "--inv", "CMILP", "--tsp", "SC",
                 "--out", str(lp)]) == 0
    text = lp.read_text()
    assert text.startswith("\\ Model:") and "Subject To" in text and text.endswith("End\n")
    assert (tmp_path / "m.lp.map").exists()
    assert main(["build", "--instance", str(inst), "--out", str(tmp_path / "m.mps")]) == 0
    assert (tmp_path / "m.mps").read_text().endswith("ENDATA\n")
    out = tmp_path / "row.csv"
    assert main(["solve", "--instance", str(inst), "--tsp", "DL", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[1][6] == "optimal"
    assert "period 1: route" in capsys.readouterr().out


def test_solve_lp_mode(tmp_path):
    out = tmp_path / "lp.csv"
    assert main(["solve", "--retailers", "2", "--periods", "2", "--lp", "true",
                 "--out", str(out)]) == 0
    assert list(csv.reader(out.open()))[1][2] == "LP"


def test_bench_and_config_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# defaults\nformulations = CMILP+DL,SP+SC\nretailers = 2\nperiods = 2\n"
                   "seeds = 2\ntiming = false\ntime-limit = 30\nretailers = 3\n")
    assert main(["bench", "--config", str(cfg), "--retailers", "2", "--out",
                 str(tmp_path / "b")]) == 0
    rows = list(csv.reader((tmp_path / "b" / "results_mip.csv").open()))
    assert len(rows) == 1 + 2 * 2
    assert all("-r2-" in r[0] and r[3] == "NA" for r in rows[1:])


def test_bench_desk_limit_and_bad_name(tmp_path, capsys):
    assert main(["bench", "--retailers", "20", "--out", str(tmp_path)]) == 2
    assert "full-scale" in capsys.readouterr().err
    assert main(["bench", "--formulations", "CMILP+XX", "--out", str(tmp_path)]) == 2


def test_oracle_kinds(capsys):
    assert main(["oracle", "--kind", "ww", "--demand", "10,20", "--K", "100", "--h", "1"]) == 0
    assert "cost 120.0" in capsys.readouterr().out
    assert main(["oracle", "--retailers", "2", "--periods", "2"]) == 0
    assert "route" in capsys.readouterr().out
    assert main(["oracle", "--kind", "tsp", "--retailers", "4"]) == 0
    assert main(["oracle", "--kind", "irp", "--retailers", "9", "--periods", "2"]) == 2


def test_verify_small(capsys):
    assert main(["verify", "--max-r", "2", "--max-n", "2", "--seeds", "1"]) == 0
    assert "0 mismatches" in capsys.readouterr().out


def test_usage_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["nope"]) == 2
    assert main(["gen"]) == 2                      # --out missing
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown-flag = 1\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert main(["gen", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["build", "--out", str(tmp_path / "m.txt")]) == 2
    assert main(["verify", "--seeds", "0"]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_read_config(tmp_path):
    p = tmp_path / "c"
    p.write_text("a_b = 1  # comment\n\n--c = x\n")
    assert read_config(p) == {"a-b": "1", "c": "x"}
    p.write_text("novalue\n")
    with pytest.raises(UsageError):
        read_config(p)
