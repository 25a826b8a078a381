import json

import pytest

from ergmax.cli import main


def run(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = main([*argv, "--output", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_maximize_command(tmp_path):
    code, doc = run(tmp_path, "maximize", "--obs", "cos(2*pi*x)")
    assert code == 0
    assert doc["alpha"] == -1.0
    assert doc["rotation"] == "0"
    assert doc["argmax"][0]["points_exact"] == ["0"]
    assert doc["searched"] == 746


def test_subaction_and_verify(tmp_path):
    code, doc = run(tmp_path, "subaction", "--obs", "cos(2*pi*(x-0.5))",
                    "--n", "4096")
    assert code == 0 and doc["converged"]
    assert abs(doc["alpha_est"] + 0.5) < 1e-5
    code, doc = run(tmp_path, "verify", "--obs", "cos(2*pi*(x-0.5))",
                    "--n", "4096")
    assert code == 0 and doc["passed"]
    names = {i["name"] for i in doc["items"]}
    assert {"sup_violation", "alpha_agreement"} <= names


def test_lock_command_and_infeasible_exit(tmp_path):
    code, doc = run(tmp_path, "lock", "--obs", "cos(2*pi*x)", "--target", "0",
                    "--delta", "0.0025", "--n", "4096", "--override-infeasible")
    assert code == 0
    assert doc["locked"] is True
    assert doc["constants"]["K"] > 0
    assert doc["far_check"]["far_ok"] and doc["far_check"]["sup_ok"]
    # without the override an infeasible schedule reports and exits 1
    code, doc = run(tmp_path, "lock", "--obs", "cos(2*pi*x)", "--target", "0",
                    "--delta", "0.0025", "--n", "4096")
    assert code == 1
    assert doc["locked"] is None and doc["feasible"] is False
    assert doc["reasons"]


def test_shadow_command(tmp_path):
    code, doc = run(tmp_path, "shadow", "--points", "0.3,0.6,0.2",
                    "--periodic")
    assert code == 0
    assert doc["y_exact"] == "2/7"
    assert doc["digits"] == [0, 1, 0]
    assert doc["achieved_bound"] <= doc["eps_bound"]


def test_mine_command(tmp_path):
    code, doc = run(tmp_path, "mine", "--seed", "0.1234567",
                    "--length", "3000", "--delta", "0.002")
    assert code == 0 and doc["count"] > 0
    first = doc["results"][0]
    assert first["delta"] <= 0.002
    assert len(first["jumps"]) == 1


def test_sweep_command(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--thetas", "0:0.5:6", "--max-period", "8",
                 "--output", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "theta,period,rotation_num,rotation_den,alpha,runner_up_gap"
    assert len(lines) == 7
    assert lines[1].startswith("0.0,1,0,1,-1.0")


def test_entropy_returns_approx_commands(tmp_path):
    code, doc = run(tmp_path, "entropy", "--samples", "uniform:20000",
                    "--max-depth", "8", "--seed", "5")
    assert code == 0 and abs(doc["value"] - 0.6931) < 0.02
    code, doc = run(tmp_path, "returns", "--q", "1/7", "--w", "1/7",
                    "--N", "3", "--length", "5000")
    assert code == 0 and doc["min_gap"] == 3
    code, doc = run(tmp_path, "approx", "--target", "points:0.25,0.75",
                    "--max-period", "8", "--obs", "cos(2*pi*x)")
    assert code == 0
    assert doc["C"] == pytest.approx(18.0, abs=1e-9)


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["maximize", "--obs", "cos("]) == 2
    assert main(["maximize", "--map", "linear:k=1",
                 "--obs", "cos(2*pi*x)"]) == 2
    assert main(["mine", "--seed", "0.5", "--max-jumps", "3"]) != 0
    capsys.readouterr()


def test_computation_errors_exit_1(tmp_path, capsys):
    # pseudo-orbit defect above the shadowing threshold
    assert main(["shadow", "--points", "0.1,0.9", "--periodic"]) == 1
    # continuum samples at absurd depth
    assert main(["entropy", "--samples", "uniform:64",
                 "--max-depth", "40"]) == 1
    capsys.readouterr()


def test_artifacts_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        main(["mine", "--seed", "0.987654321", "--length", "2000",
              "--delta", "0.003", "--output", str(path)])
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.json", tmp_path / "d.json"
    for path in (c, d):
        main(["entropy", "--samples", "uniform:5000", "--seed", "11",
              "--max-depth", "8", "--output", str(path)])
    assert c.read_bytes() == d.read_bytes()
