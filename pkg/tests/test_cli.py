import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fraclap.cli import ConfigError, main, parse_args, write_csv


def run(tmp_path, *args):
    code = main([*args, "--output", str(tmp_path)])
    summary = json.loads((tmp_path / "summary.json").read_text()) if (tmp_path / "summary.json").exists() else None
    return code, summary


def test_flags_override_config_override_defaults(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"s": 0.7, "alpha": 2.0, "M": 128}))
    c = parse_args(["solve", "--config", str(cfg), "--alpha", "1.5"])
    assert (c.s, c.alpha, c.M, c.N, c.tol) == (0.7, 1.5, 128, 1, 1e-9)


def test_output_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("FRACLAP_OUTPUT", str(tmp_path / "env"))
    assert parse_args(["solve"]).output == tmp_path / "env"
    assert parse_args(["solve", "--output", "x"]).output.name == "x"


@pytest.mark.parametrize("argv", [["solve", "--N", "3", "--s", "0.5", "--alpha", "1.0"], ["spectrum", "--N", "2", "--s", "0.25", "--alpha", "5"]])
def test_inadmissible_power_exits_with_bound(argv, capsys):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert "alpha_*" in err


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": 1}))
    with pytest.raises(ConfigError):
        parse_args(["solve", "--config", str(cfg)])


def test_unknown_flag_exits():
    with pytest.raises(SystemExit) as exc:
        parse_args(["solve", "--bogus"])
    assert exc.value.code == 2


def test_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, {"a": np.array([1.0, 1 / 3]), "b": np.array([2.0, -0.5])})
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["a", "b"]
    assert rows[2][0] == "3.3333333333333331e-01"


def test_solve_writes_outputs(tmp_path):
    code, summary = run(tmp_path, "solve", "--s", "1.0", "--alpha", "1.0", "--R", "40", "--M", "256")
    assert code == 0 and summary["pass"]
    assert summary["ground_state"]["Q0"] == pytest.approx(1.5, rel=1e-8)
    data = np.loadtxt(tmp_path / "Q_profile.csv", delimiter=",", skiprows=1)
    assert data.shape == (256, 2)


def test_solve_is_deterministic(tmp_path):
    args = ("solve", "--s", "0.5", "--R", "100", "--M", "256")
    run(tmp_path / "a", *args)
    run(tmp_path / "b", *args)
    assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()
    assert (tmp_path / "a" / "Q_profile.csv").read_bytes() == (tmp_path / "b" / "Q_profile.csv").read_bytes()


@pytest.mark.parametrize(
    "argv, table",
    [
        (["spectrum", "--R", "200", "--M", "1024"], "spectrum"),
        (["extend", "--s", "0.25"], "neumann_trace"),
        (["resolvent", "--N", "3", "--s", "0.75", "--lam", "2"], "resolvent"),
        (["homotopy", "--s", "0.5", "--M", "256"], "homotopy"),
        (["continue", "--s", "0.97", "--R", "200", "--M", "1024"], "branch"),
    ],
)
def test_commands_pass(tmp_path, argv, table):
    code, summary = run(tmp_path, *argv)
    assert code == 0, summary
    assert (tmp_path / f"{table}.csv").exists()


def test_verify_all_pass_and_timings(tmp_path, capsys):
    code, summary = run(tmp_path, "verify-all", "--only", "7")
    assert code == 0
    assert "PASS criterion  7" in capsys.readouterr().out
    assert "seconds" not in json.dumps(summary)
    assert "7" in json.loads((tmp_path / "timings.json").read_text())


def test_verify_all_reports_failure(tmp_path):
    # the literal Dirichlet-Neumann constant check fails away from s = 1/2
    code, summary = run(tmp_path, "verify-all", "--only", "8")
    assert code == 1 and summary["checks"] == {"criterion_8": False}


def test_runtime_failure_is_recorded(tmp_path):
    code, summary = run(tmp_path, "continue", "--s", "0.9", "--step", "0.2", "--M", "64")
    assert code == 1
    assert "nominal step" in summary["error"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fraclap.cli", "--help"], capture_output=True, text=True, check=True)
    assert "verify-all" in out.stdout
