#!/usr/bin/env python3
"""
Integration tests for the sweepcore command line

Tests cover:
- solve: trajectory CSV and summary outputs
- convergence: report files and thread-count independence
- check: diagnostics report
- Exit codes and error messages
- Reproducibility of outputs
"""

import csv
import json

import numpy as np
import pytest

from sweepcore.common.exceptions import Infeasible, StepFailure
from sweepcore.interfaces.cli import app, main


def write_config(tmp_path, name="run.json", **data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def read_trajectory(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], np.array(rows[1:], dtype=np.float64)


class TestSolve:
    """Test suite for the solve subcommand"""

    def test_moving_wall(self, tmp_path):
        """Test the node column equals t_k and a summary is written"""
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d", steps=100)
        out = tmp_path / "out"
        assert main(["solve", "--config", str(config), "--out", str(out)]) == 0

        header, data = read_trajectory(out / "trajectory.csv")
        assert header == ["t", "q0"]
        assert data.shape == (101, 2)
        np.testing.assert_allclose(data[:, 1], data[:, 0], rtol=0.0, atol=1e-12)

        summary = json.loads((out / "summary.json").read_text())
        assert summary["n"] == 100
        assert summary["scenario"] == "moving-wall-1d"
        assert summary["exact_error"] <= 1e-12
        assert summary["feasibility_margin"] >= -1e-9

    def test_step_list(self, tmp_path):
        """Test one trajectory per step count"""
        config = write_config(tmp_path, scenario="builtin:halfplane-sweep-2d", steps=[4, 8])
        assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "trajectory_n4.csv").exists()
        assert (tmp_path / "trajectory_n8.csv").exists()
        assert (tmp_path / "summary_n8.json").exists()

    def test_output_dir_from_config(self, tmp_path, monkeypatch):
        """Test output_dir is used without --out"""
        monkeypatch.chdir(tmp_path)
        config = write_config(tmp_path, scenario="builtin:static-wall-push-1d", steps=10, output_dir="results")
        assert main(["solve", "--config", str(config)]) == 0
        assert (tmp_path / "results" / "trajectory.csv").exists()

    def test_crowd_feasible(self, tmp_path):
        """Test a 20-disk crowd run stays feasible"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 20}, steps=100, seed=1)
        assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["feasibility_margin"] >= -1e-9
        assert summary["dimension"] == 40
        assert summary["constraints"] == 190 + 100

    def test_crowd_with_pruning(self, tmp_path, monkeypatch):
        """Test pruned crowd steps agree with full steps"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 8}, steps=40, horizon=2.0, seed=2)
        assert main(["solve", "--config", str(config), "--out", str(tmp_path / "full")]) == 0
        monkeypatch.setenv("SWEEP_CROWD_PRUNE_PAIRS", "1")
        from sweepcore.config import reset_config

        reset_config()
        assert main(["solve", "--config", str(config), "--out", str(tmp_path / "pruned")]) == 0
        _, full = read_trajectory(tmp_path / "full" / "trajectory.csv")
        _, pruned = read_trajectory(tmp_path / "pruned" / "trajectory.csv")
        np.testing.assert_allclose(pruned, full, atol=1e-8)

    def test_reproducible(self, tmp_path):
        """Test identical config and seed give byte-identical CSVs"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 6}, steps=50, horizon=2.0)
        for run in ("a", "b"):
            assert main(["solve", "--config", str(config), "--out", str(tmp_path / run), "--seed", "5"]) == 0
        first = (tmp_path / "a" / "trajectory.csv").read_bytes()
        assert first == (tmp_path / "b" / "trajectory.csv").read_bytes()

    def test_seed_changes_placement(self, tmp_path):
        """Test --seed overrides the config seed"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 3}, steps=5)
        main(["solve", "--config", str(config), "--out", str(tmp_path / "a"), "--seed", "1"])
        main(["solve", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "2"])
        assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "b" / "trajectory.csv").read_bytes()


class TestExitCodes:
    """Test suite for error handling"""

    def test_unknown_key(self, tmp_path, capsys):
        """Test unknown config keys exit with code 2"""
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d", stepz=3)
        assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_malformed_json(self, tmp_path):
        """Test malformed JSON exits with code 2"""
        path = tmp_path / "run.json"
        path.write_text("not json")
        assert main(["check", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_h_below_h_min(self, tmp_path):
        """Test a step size below h_min is a configuration error"""
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d", h_list=[0.001, 0.1], h_min=0.01)
        assert main(["convergence", "--config", str(config), "--out", str(tmp_path)]) == 2

    def test_overpacked_crowd(self, tmp_path):
        """Test an impossible scenario exits with code 2"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 5000})
        assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 2

    def test_solver_failure_reports_step(self, tmp_path, capsys, monkeypatch):
        """Test solver errors exit with code 3 and name the failing step"""
        def failing_solve(*args, **kwargs):
            raise StepFailure(7, Infeasible("empty linearization"))

        monkeypatch.setattr(app, "solve", failing_solve)
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d", steps=10)
        assert main(["solve", "--config", str(config), "--out", str(tmp_path)]) == 3
        assert "step 7" in capsys.readouterr().err

    def test_bad_threads(self, tmp_path):
        """Test --threads must be positive"""
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d")
        assert main(["convergence", "--config", str(config), "--out", str(tmp_path), "--threads", "0"]) == 2


class TestConvergence:
    """Test suite for the convergence subcommand"""

    def test_moving_wall_exact(self, tmp_path):
        """Test every e_h vanishes and the slope is the exact sentinel"""
        config = write_config(tmp_path, scenario="builtin:moving-wall-1d", h_list=[0.01, 0.05, 0.1, 0.2, 0.5],
                              h_min=0.01)
        assert main(["convergence", "--config", str(config), "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "convergence.json").read_text())
        assert report["slope"] == "exact"
        assert all(p["e_h"] <= 1e-12 for p in report["points"])
        lines = (tmp_path / "convergence.csv").read_text().splitlines()
        assert lines[0] == "h,e_h,included_in_fit"
        assert len(lines) == 6

    def test_reference_point_has_zero_error(self, tmp_path):
        """Test h = h_min reports e_h = 0"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 4}, horizon=1.0,
                              h_list=[0.05, 0.1, 0.2, 0.25, 0.5], h_min=0.05)
        assert main(["convergence", "--config", str(config), "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "convergence.json").read_text())
        assert report["points"][0]["e_h"] == 0.0
        assert not report["points"][0]["included_in_fit"]

    def test_threads_do_not_change_results(self, tmp_path):
        """Test the report is independent of the thread count"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 5}, horizon=2.0,
                              h_list=[0.1, 0.2, 0.25, 0.5], h_min=0.05)
        main(["convergence", "--config", str(config), "--out", str(tmp_path / "one"), "--threads", "1"])
        main(["convergence", "--config", str(config), "--out", str(tmp_path / "four"), "--threads", "4"])
        assert (tmp_path / "one" / "convergence.csv").read_bytes() == (tmp_path / "four" / "convergence.csv").read_bytes()

    def test_crowd_order(self, tmp_path):
        """Test the 20-disk crowd converges with a log-log slope between 0.45 and 1.2"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 20, "radius": 0.2}, horizon=4.0,
                              h_min=0.01, h_list=[0.02, 0.025, 0.04, 0.05, 0.0625, 0.08, 0.1, 0.2, 0.5])
        assert main(["convergence", "--config", str(config), "--out", str(tmp_path), "--threads", "4"]) == 0
        report = json.loads((tmp_path / "convergence.json").read_text())
        assert sum(p["included_in_fit"] for p in report["points"]) >= 5
        assert 0.45 <= report["slope"] <= 1.2


class TestCheck:
    """Test suite for the check subcommand"""

    def test_crowd_check(self, tmp_path):
        """Test scenario-derived constants verify without violations"""
        config = write_config(tmp_path, scenario={"kind": "crowd", "count": 3}, seed=3)
        assert main(["check", "--config", str(config), "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "diagnostics.json").read_text())
        for key in ("eta", "theta", "r_qual"):
            assert report[key] > 0
        assert report["quadratic_bound_violations"] == 0
        assert report["qualification_violations"] == 0
        assert report["params_source"] == "scenario"

    def test_explicit_params(self, tmp_path):
        """Test unit gamma gives theta = 2 beta / alpha"""
        params = {"alpha": 1.0, "beta": 1.0, "m_bound": 1.0, "rho": 0.5, "gamma": 1.0}
        config = write_config(tmp_path, scenario="builtin:halfplane-sweep-2d", params=params)
        assert main(["check", "--config", str(config), "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "diagnostics.json").read_text())
        assert report["theta"] == pytest.approx(2.0)
        assert report["params_source"] == "config"
