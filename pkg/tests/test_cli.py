"""End-to-end CLI behavior: configs in, tables or records out, exit codes."""

import json

import pytest

from taucert import cli


def run(tmp_path, capsys, command, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code = cli.main([command, "--config", str(path), *extra])
    out = capsys.readouterr()
    return code, out.out, out.err


EXP = {"kind": "exponential", "rate": 1.0}


def test_analyze_table(tmp_path, capsys):
    code, out, err = run(tmp_path, capsys, "analyze", {"measure": EXP, "h": [0.5, 1.0, 2.0]})
    assert code == 0
    assert "0.606531" in out  # lambda*(1/2) = e^{-1/2}
    assert "0.367879" in out
    assert "42.5451" in out  # 17 / (1 - e^{-1})^2
    assert err == ""


def test_analyze_records(tmp_path, capsys):
    code, out, _ = run(
        tmp_path, capsys, "analyze", {"measure": EXP, "h": 1.0}, "--format", "records"
    )
    assert code == 0
    lines = [json.loads(line) for line in out.strip().splitlines()]
    assert all(rec["schema"] == "taucert.v1" for rec in lines)
    names = {rec["record"] for rec in lines}
    assert "tail_ratio" in names and "hardy_constants" in names
    hardy = next(rec for rec in lines if rec["record"] == "hardy_constants")
    assert hardy["muckenhoupt"] == pytest.approx(1.0, abs=1e-9)


def test_output_file_determinism(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"measure": EXP, "h": [1.0, 2.0]}))
    out1 = tmp_path / "a.txt"
    out2 = tmp_path / "b.txt"
    for out in (out1, out2):
        code = cli.main(["analyze", "--config", str(cfg), "--format", "records",
                         "--out", str(out), "--quiet"])
        assert code == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert out1.read_bytes() == out2.read_bytes()


def test_tau_small_suite(tmp_path, capsys):
    cfg = {
        "measure": EXP,
        "h": 1.0,
        "trials": 5,
        "suites": ["tail_to_tau"],
        "adversarial_budget": 10,
    }
    code, out, _ = run(tmp_path, capsys, "tau", cfg, "--seed", "0")
    assert code == 0
    assert "violations" in out


def test_tau_requires_seed(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, "tau", {"measure": EXP, "h": 1.0})
    assert code == 2
    assert "seed" in err


def test_tau_negative_control(tmp_path, capsys):
    cfg = {
        "measure": EXP,
        "h": 1.0,
        "trials": 5,
        "suites": ["tail_to_tau"],
        "c_tau_scale": 1e-3,
        "adversarial_budget": 0,
    }
    code, out, _ = run(tmp_path, capsys, "tau", cfg, "--seed", "0")
    assert code == 5
    assert "violations" in out  # the report still prints before the exit code


def test_poincare_given_cp(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, "poincare", {"measure": EXP, "cp": 4.0})
    assert code == 0
    assert "yes" in out
    code, _, err = run(
        tmp_path, capsys, "poincare", {"measure": {"kind": "two_point", "a": 1.0}, "cp": 0.05}
    )
    assert code == 5


def test_poincare_estimated_cp(tmp_path, capsys):
    cfg = {"measure": {"kind": "uniform", "r": 1.0}, "trials": 10}
    code, out, _ = run(tmp_path, capsys, "poincare", cfg, "--seed", "3")
    assert code == 0
    assert "cp_lower" in out or "cp" in out


def test_config_errors(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, "analyze", {"measure": EXP, "hh": 1.0})
    assert code == 2 and "config error" in err

    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert cli.main(["analyze", "--config", str(bad)]) == 2
    capsys.readouterr()

    assert cli.main(["analyze", "--config", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()

    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus-command"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_measure_errors(tmp_path, capsys):
    code, _, err = run(
        tmp_path, capsys, "analyze", {"measure": {"kind": "exponential", "rate": -2.0}}
    )
    assert code == 3
    assert "invalid measure" in err
    asym = {
        "kind": "atom_density_mix",
        "atoms": [[0.5, 0.5]],
        "density_pieces": [[-0.5, 0.5, 0.5, 0.0]],
    }
    code, _, err = run(tmp_path, capsys, "analyze", {"measure": asym})
    assert code == 3


def test_degenerate_exit(tmp_path, capsys):
    cfg = {
        "mode": "two_level",
        "measure": {"factor": EXP, "copies": 2},
        "set": {"kind": "l2_ball", "center": [50.0, 50.0], "radius": 0.1},
        "h": 1.0,
        "lambda": 0.368,
        "t_grid": [1.0],
        "samples": 400,
    }
    code, _, err = run(tmp_path, capsys, "concentrate", cfg, "--seed", "1")
    assert code == 4
    assert "degenerate input" in err


def test_concentrate_happy_path(tmp_path, capsys):
    cfg = {
        "mode": "two_level",
        "measure": {"factor": EXP, "copies": 4},
        "set": {"kind": "half_space", "a": [0.5, 0.5, 0.5, 0.5], "c": 0.0},
        "h": 1.0,
        "lambda": 0.368,
        "t_grid": [0.5, 2.0],
        "samples": 2000,
    }
    code, out, _ = run(tmp_path, capsys, "concentrate", cfg, "--seed", "1", "--format", "records")
    assert code == 0
    recs = [json.loads(line) for line in out.strip().splitlines()]
    assert recs[0]["record"] == "two_level_enlargement"
    assert recs[0]["passed"] is True


def test_concentrate_deviation(tmp_path, capsys):
    cfg = {
        "mode": "deviation",
        "measure": {"factor": {"kind": "uniform", "r": 1.0}, "copies": 8},
        "function": {"kind": "max_coordinate"},
        "h": 1.01,
        "lambda": 0.0,
        "t_grid": [2.0],
        "samples": 1500,
    }
    code, out, _ = run(tmp_path, capsys, "concentrate", cfg, "--seed", "4")
    assert code == 0
    assert "deviation" in out


def test_tau_trials_zero(tmp_path, capsys):
    cfg = {"measure": EXP, "h": 1.0, "trials": 0, "suites": ["tail_to_tau"],
           "adversarial_budget": 0}
    code, _, _ = run(tmp_path, capsys, "tau", cfg, "--seed", "0")
    assert code == 0
