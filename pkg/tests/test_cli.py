import json

import numpy as np
import pytest

from axidirect import cli
from axidirect.io import read_csv, write_csv


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage(capsys):
    code, _, err = run([], capsys)
    assert code == 2 and "usage" in err


def test_minmax_analytic_ordering(tmp_path, capsys):
    code, _, _ = run(["minmax-analytic", "--alpha", "0.39", "--ratios", "0,1e-6,1e-4,1e-2",
                      "--gamma-step", "0.1", "--out", str(tmp_path), "--svg"], capsys)
    assert code == 0
    h, c = read_csv(tmp_path / "minmax_analytic.csv")
    assert h == ["ratio", "gamma", "B", "mu0"]
    curves = [c["mu0"][c["ratio"] == r] for r in (0.0, 1e-6, 1e-4, 1e-2)]
    assert len(curves) == 4
    for lo, hi in zip(curves, curves[1:]):
        ok = np.isfinite(lo) & np.isfinite(hi)
        assert np.all(hi[ok] >= lo[ok])
    assert (tmp_path / "minmax_analytic.svg").read_text().startswith("<svg")


def test_trace_2d(tmp_path, capsys):
    code, _, _ = run(["trace-2d", "--from", "-0.9", "--to", "0.9", "--step", "0.05",
                      "--out", str(tmp_path)], capsys)
    assert code == 0
    _, c = read_csv(tmp_path / "trajectory.csv")
    lam, reg = c["lambda"], c["regime"]
    switches = [lam[i + 1] for i in range(len(lam) - 1) if reg[i] != reg[i + 1]]
    assert switches == pytest.approx([-0.5, 0.55])


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"from": 0.0, "to": 0.2, "step": 0.1}))
    code, _, _ = run(["trace-2d", "--config", str(cfg), "--to", "0.4", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, c = read_csv(tmp_path / "trajectory.csv")
    assert list(c["lambda"]) == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4])


def test_unknown_key_is_json_error(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _, err = run(["trace-2d", "--config", str(cfg)], capsys)
    assert code == 1 and json.loads(err)["error"] == "invalid_input"


def test_module_error_is_json(tmp_path, capsys):
    code, _, err = run(["solve", "--rho", "3", "--rho-hat", "2", "--grid", "8,16", "--out", str(tmp_path)], capsys)
    assert code == 1 and "error" in json.loads(err)


def test_window(tmp_path, capsys):
    code, _, _ = run(["minmax-window", "--gamma-from", "0.6", "--gamma-to", "0.6", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, c = read_csv(tmp_path / "minmax_window.csv")
    assert c["solvable"][0] == "true" and c["delta"][0] > 0


def test_shoot_reduced(tmp_path, capsys):
    code, _, _ = run(["shoot", "--reduced", "--gamma", "0.6", "--ratios", "1e-2", "--n-scan", "60",
                      "--out", str(tmp_path)], capsys)
    assert code == 0
    h, c = read_csv(tmp_path / "shoot_reduced.csv")
    assert h == ["gamma", "ratio", "mu_numeric", "mu_analytic", "abs_err"] and c["abs_err"][0] < 1e-6


def test_hardy_verify(tmp_path, capsys):
    code, _, _ = run(["hardy-verify", "--n", "5", "--out", str(tmp_path)], capsys)
    assert code == 0
    _, c = read_csv(tmp_path / "hardy.csv")
    assert len(c["lhs"]) == 25 and all(v == "true" for v in c["holds"])


def test_solve(tmp_path, capsys):
    code, _, _ = run(["solve", "--grid", "32,64", "--out", str(tmp_path), "--svg"], capsys)
    assert code == 0
    h, c = read_csv(tmp_path / "field.csv")
    assert h == ["r", "phi", "b_zeta", "b_rho", "q", "p"] and len(c["r"]) == 32 * 64
    s = json.loads((tmp_path / "summary.json").read_text())
    assert s["amplitude_min"] > 0 and s["zeros"] == []


def test_solve_from_direction_file(tmp_path, capsys):
    from axidirect.geometry import DirectionField, MultipoleSpec
    DirectionField.from_multipole(MultipoleSpec(3, [-1.0, 0.0, -2.0]), 720).to_csv(tmp_path / "d.csv")
    code, _, _ = run(["solve", "--direction", str(tmp_path / "d.csv"), "--rho", "4", "--zeros", "1.732j",
                      "--grid", "32,64", "--out", str(tmp_path)], capsys)
    assert code == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert len(s["zeros"]) == 1 and s["zeros"][0][2] == -1


def test_shift_zero(tmp_path, capsys):
    code, _, _ = run(["shift-zero", "--grid", "32,64", "--out", str(tmp_path)], capsys)
    assert code == 0
    s = json.loads((tmp_path / "shift_summary.json").read_text())
    assert s["decay_order"] == 4 and s["axis_zeros"] == pytest.approx([2.0])


def test_verify_subset(tmp_path, capsys):
    code, out, _ = run(["verify-all", "--criteria", "1,4", "--out", str(tmp_path)], capsys)
    assert code == 0 and out.count("[PASS]") == 2


def test_empty_table_and_round_trip(tmp_path):
    p = write_csv(tmp_path / "e.csv", ["a", "b"], [])
    assert p.read_text() == "a,b\n"
    vals = [0.1, 1 / 3, 2.0 ** -1074, 1e300]
    write_csv(tmp_path / "v.csv", ["x"], [(v,) for v in vals])
    _, c = read_csv(tmp_path / "v.csv")
    assert list(c["x"]) == vals
