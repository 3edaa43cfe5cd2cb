import json
import subprocess
import sys

import numpy as np
import pytest

from starsis import cli
from starsis.reduced_map import State2


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    data = json.loads(out)
    assert data.pop("schema") == "starlike-sis/1"
    return data


def test_threshold_star(capsys):
    assert run_json(capsys, "threshold", "--a", "0.5", "--n", "4", "--b", "0.2") == {
        "threshold": 0.25, "regime": "Subcritical"}


def test_threshold_counts(capsys):
    data = run_json(capsys, "threshold", "--a", "0.5", "--counts", "2,2", "--b", "0.3")
    assert data == {"threshold": 0.25, "regime": "Supercritical"}


def test_threshold_without_b_has_no_regime(capsys):
    assert run_json(capsys, "threshold", "--a", "0.5", "--n", "4") == {"threshold": 0.25}


@pytest.mark.parametrize("argv", [
    ["threshold", "--n", "4"],
    ["threshold", "--a", "1.5", "--n", "4"],
    ["threshold", "--a", "0.5", "--n", "0"],
    ["threshold", "--a", "0.5", "--n", "four"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_fixed_point_star(capsys):
    data = run_json(capsys, "fixed-point", "--a", "0.5", "--b", "0.4", "--n", "4")
    assert data["regime"] == "Supercritical"
    assert data["trivial"] == [0, 0]
    assert data["nontrivial"][0] == pytest.approx(0.69769273898715422931, abs=1e-13)
    assert data["residual"] <= 1e-12


def test_fixed_point_subcritical(capsys):
    data = run_json(capsys, "fixed-point", "--a", "0.5", "--b", "0.1", "--n", "4")
    assert data["nontrivial"] is None and data["regime"] == "Subcritical"


def test_fixed_point_multilevel_and_scalar(capsys):
    data = run_json(capsys, "fixed-point", "--a", "0.5", "--b", "0.3", "--counts", "2,2")
    assert len(data["nontrivial"]) == 3 and data["threshold"] == 0.25
    data = run_json(capsys, "fixed-point", "--a", "0.6", "--b", "0.8", "--scalar")
    assert data["nontrivial"] == pytest.approx(5 / 6) and data["x_c"] == pytest.approx(5 / 12)


def test_solver_failure_exit_3(capsys, monkeypatch):
    from starsis.errors import ConvergenceError

    def boom(sp):
        raise ConvergenceError("no bracket")

    monkeypatch.setattr(cli.reduced_map, "solve_fixed_points", boom)
    code, _, err = run(capsys, "fixed-point", "--a", "0.5", "--b", "0.4", "--n", "4")
    assert code == 3 and "no bracket" in err


def test_iterate_and_unresolved(capsys):
    data = run_json(capsys, "iterate", "--a", "0.5", "--b", "0.4", "--n", "4", "--start", "0.1,0.1")
    assert data["limit_kind"] == "Nontrivial"
    data = run_json(capsys, "iterate", "--a", "0.5", "--b", "0.4", "--n", "4", "--max-iters", "3")
    assert data == {**data, "limit_kind": "Unresolved", "iterations": 3}


def test_iterate_trace_csv(capsys):
    code, out, _ = run(capsys, "iterate", "--a", "0.5", "--b", "0.2", "--n", "4",
                       "--start", "0.3,0.2", "--trace", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,x,y"
    t, x, y = lines[1].split(",")
    assert (t, float(x), float(y)) == ("0", 0.3, 0.2)
    assert lines[-1].startswith(f"{len(lines) - 2},")


def test_iterate_levels_and_scalar(capsys):
    data = run_json(capsys, "iterate", "--a", "0.5", "--b", "0.3", "--counts", "2,2",
                    "--tol", "1e-13", "--trace")
    assert data["limit_kind"] == "Nontrivial" and len(data["trace"][0]) == 4
    data = run_json(capsys, "iterate", "--a", "0.6", "--b", "0.8", "--scalar", "--start", "1e-6")
    assert data["limit"] == pytest.approx(5 / 6, abs=1e-8)
    code, _, _ = run(capsys, "iterate", "--a", "0.5", "--b", "0.4", "--n", "4", "--start", "0.1")
    assert code == 2


def test_sweep_line_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--line-m", "1.2357", "--steps", "200", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == ",".join(cli.SWEEP_COLUMNS) and len(lines) == 201
    assert all(0 < float(r.split(",")[6]) < 1 for r in lines[1:])
    code, out, _ = run(capsys, "sweep", "--line-m", "1.2357", "--steps", "2", "--format", "csv")
    assert len(out.splitlines()) == 3


def test_sweep_grid_empty_fields_below_threshold(capsys):
    code, out, _ = run(capsys, "sweep", "--a-range", "0.5,0.5,1", "--b-range", "0.1,0.4,4",
                       "--n", "4", "--format", "csv")
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert code == 0 and len(rows) == 4
    for r in rows:
        if r[3] == "Subcritical":
            assert r[4:] == ["", "", ""]
        else:
            assert all(r[4:])


def test_sweep_json(capsys):
    data = run_json(capsys, "sweep", "--a-range", "0.5,0.5,1", "--b-range", "0.1,0.4,2", "--n", "4")
    assert data["columns"] == list(cli.SWEEP_COLUMNS) and len(data["rows"]) == 2
    assert data["rows"][0][4] is None


@pytest.mark.parametrize("argv", [
    ["sweep", "--a-range", "0.1,0.9,0", "--b-range", "0.1,0.9,2", "--n", "2"],
    ["sweep", "--line-m", "0.5", "--steps", "10"],
    ["sweep", "--line-m", "1.2", "--steps", "0"],
    ["sweep", "--line-m", "1.2"],
])
def test_sweep_bad_domain(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_validate_star_and_levels(capsys):
    data = run_json(capsys, "validate", "--a", "0.5", "--b", "0.4", "--n", "4", "--tol", "1e-12")
    assert data["pass"] and data["max_discrepancy"] <= 1e-12 and data["steps"] == 1000
    data = run_json(capsys, "validate", "--a", "0.5", "--b", "0.4", "--counts", "2,3", "--tol", "1e-12")
    assert data["pass"]


def test_validate_catches_corrupted_reduction(capsys, monkeypatch):
    def corrupted(sp, s):
        x, y = s
        return State2(x, min(1.0, y * 1.001))

    monkeypatch.setattr(cli, "reduced_star_step", corrupted)
    code, out, _ = run(capsys, "validate", "--a", "0.5", "--b", "0.4", "--n", "4")
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_validate_catches_corrupted_level_map(capsys, monkeypatch):
    monkeypatch.setattr(cli, "reduced_level_step", lambda lp, s: np.asarray(s) * 0.5)
    assert run(capsys, "validate", "--a", "0.5", "--b", "0.4", "--counts", "2,2")[0] == 1


def test_classify_point_and_flip(capsys):
    data = run_json(capsys, "classify", "--a", "0.5", "--b", "0.4", "--n", "4", "--point", "0.1,0.05")
    assert data["region"] == "I"
    data = run_json(capsys, "classify", "--a", "0.5", "--b", "0.4", "--n", "4", "--flip",
                    "--samples", "100")
    assert data["label"] in {"Flipping", "NonFlipping", "Inconsistent"}
    assert data["in_region"] == {"II": 100, "IV": 100}


def test_classify_flip_subcritical_exit_2(capsys):
    assert run(capsys, "classify", "--a", "0.5", "--b", "0.2", "--n", "4", "--flip")[0] == 2


def test_determinism(capsys):
    argv = ["classify", "--a", "0.3", "--b", "0.7", "--n", "2", "--flip", "--samples", "200",
            "--seed", "11"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    argv = ["sweep", "--line-m", "1.1", "--steps", "20", "--format", "csv"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"a": 0.5, "b": 0.2, "n": 4}))
    assert run_json(capsys, "threshold", "--config", str(cfg))["regime"] == "Subcritical"
    assert run_json(capsys, "threshold", "--config", str(cfg), "--b", "0.3")["regime"] == "Supercritical"
    cfg.write_text(json.dumps({"colour": 1}))
    assert run(capsys, "threshold", "--config", str(cfg))[0] == 2
    assert run(capsys, "threshold", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_output_file(capsys, tmp_path):
    path = tmp_path / "out.json"
    code, out, _ = run(capsys, "threshold", "--a", "0.5", "--n", "4", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["threshold"] == 0.25


def test_floats_have_17_digits():
    assert cli.fmt_float(0.1) == "0.10000000000000001"
    assert float(cli.fmt_float(1 / 3)) == 1 / 3
    assert cli.to_json({"v": float("nan")}) == '{"schema": "starlike-sis/1", "v": null}\n'


def test_csv_single_row_report(capsys):
    code, out, _ = run(capsys, "threshold", "--a", "0.5", "--n", "4", "--b", "0.2", "--format", "csv")
    assert out.splitlines() == ["threshold,regime", "0.25,Subcritical"]


def test_help_documents_sweep_columns(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["sweep", "--help"])
    assert ",".join(cli.SWEEP_COLUMNS) in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "starsis", "threshold", "--a", "0.5", "--n", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and '"threshold": 0.25' in proc.stdout
