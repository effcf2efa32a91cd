#!/usr/bin/env python3
"""
Unit tests for the prediction-correction stepper

Tests cover:
- Exactness on the analytic builtin scenarios
- Feasibility of every node
- Explicit Euler without constraints and averaged field sampling
- Interpolants, grid maps and trajectory distances
- Failure reporting with the step index
- Lag ratio and discrete velocity across refinements
- Jammed chains with dependent contact rows
"""

import math

import numpy as np
import pytest

from sweepcore.common.exceptions import DimensionMismatch, EvaluationError, OutOfRange, StepFailure
from sweepcore.core.model import Constraint, SweepingProblem
from sweepcore.crowd import CrowdScenario, build
from sweepcore.interfaces.cli.builtins import BUILTINS
from sweepcore.stepper import (
    error_samples,
    exact_error,
    grid_maps,
    interpolate,
    sampled_f,
    solve,
    step,
    sup_error,
    trajectory_summary,
)
from tests.helpers import jammed_chain


class TestBuiltins:
    """Test suite for exactness on closed-form solutions"""

    @pytest.mark.parametrize("n", [10, 100, 1000])
    def test_moving_wall_tracks_time(self, n):
        """Test q_k = t_k on the moving wall"""
        traj = solve(BUILTINS["moving-wall-1d"].build(), n)
        np.testing.assert_allclose(traj.nodes[:, 0], traj.times, rtol=0.0, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_exact_at_nodes(self, name):
        """Test every builtin reproduces its exact solution at the nodes"""
        builtin = BUILTINS[name]
        traj = solve(builtin.build(), 200)
        assert exact_error(traj, builtin.exact) <= 1e-9

    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_feasibility_invariant(self, name):
        """Test min_k,i g_i(t_k, q_k) >= -1e-9"""
        traj = solve(BUILTINS[name].build(), 137)
        assert traj.feasibility_margin >= -1e-9

    def test_two_disk_stationary_after_contact(self):
        """Test the head-on disks stop moving once they touch"""
        traj = solve(BUILTINS["two-disk-headon"].build(), 200)
        contact = int(np.argmax(traj.times >= 0.8)) + 1
        after = traj.step_stats[contact:contact + 100]
        assert len(after) == 100
        assert max(r.displacement for r in after) <= 1e-8

    def test_lag_distance_on_moving_wall(self):
        """Test the wall outruns the previous node by exactly h"""
        traj = solve(BUILTINS["moving-wall-1d"].build(), 50)
        for record in traj.step_stats:
            assert record.lag_distance == pytest.approx(traj.h, abs=1e-12)

    def test_pushing_against_static_wall(self):
        """Test a point pushed into a static wall stays on it"""
        traj = solve(BUILTINS["static-wall-push-1d"].build(), 40)
        np.testing.assert_allclose(traj.nodes[20:, 0], 0.0, atol=1e-12)
        assert traj.feasibility_margin >= -1e-12


class TestUnconstrained:
    """Test suite for problems without constraints"""

    def test_explicit_euler(self, free_problem):
        """Test p = 0 reduces to explicit Euler"""
        traj = solve(free_problem, 8)
        np.testing.assert_allclose(traj.nodes[-1], [1.0, -2.0], atol=1e-12)
        assert traj.feasibility_margin == math.inf
        assert traj.velocity_bound == pytest.approx(math.sqrt(5.0))

    def test_averaged_sampling_integrates_time_dependence(self):
        """Test averaged sampling integrates f(t) = cos t exactly up to quadrature error"""
        problem = SweepingProblem([], lambda t, q: np.array([math.cos(t)]), [0.0], 1.0)
        left = solve(problem, 10, f_sampling="left")
        averaged = solve(problem, 10, f_sampling="averaged")
        assert abs(averaged.nodes[-1, 0] - math.sin(1.0)) <= 1e-12
        assert abs(left.nodes[-1, 0] - math.sin(1.0)) > 1e-3

    def test_unknown_sampling(self, free_problem):
        """Test an unknown f_sampling mode is rejected"""
        with pytest.raises(ValueError):
            solve(free_problem, 4, f_sampling="midpoint")

    def test_step_count_positive(self, free_problem):
        """Test n >= 1"""
        with pytest.raises(ValueError):
            solve(free_problem, 0)


class TestTrajectory:
    """Test suite for DiscreteTrajectory helpers"""

    def test_grid(self, box_problem):
        """Test node count, step size and end time"""
        traj = solve(box_problem, 7)
        assert traj.nodes.shape == (8, 2)
        assert traj.h == pytest.approx(2.0 / 7)
        assert traj.times[-1] == 2.0
        assert len(traj.step_stats) == 7

    def test_box_corner_reached(self, box_problem):
        """Test the drift pins the point into the upper right corner"""
        traj = solve(box_problem, 40)
        np.testing.assert_allclose(traj.nodes[-1], [1.0, 1.0], atol=1e-10)
        assert traj.feasibility_margin >= -1e-9

    def test_on_step_called_for_every_node(self, box_problem):
        """Test the streaming callback sees k = 0..n in order"""
        seen = []
        solve(box_problem, 5, on_step=lambda k, t, q: seen.append((k, t, q.copy())))
        assert [k for k, _, _ in seen] == list(range(6))
        assert seen[-1][1] == 2.0

    def test_interpolate(self, free_problem):
        """Test the piecewise linear interpolant"""
        traj = solve(free_problem, 4)
        np.testing.assert_allclose(interpolate(traj, 0.125), [0.125, -0.25])
        np.testing.assert_array_equal(interpolate(traj, 0.25), traj.nodes[1])
        np.testing.assert_array_equal(interpolate(traj, 1.0), traj.nodes[-1])

    def test_interpolate_out_of_range(self, free_problem):
        """Test times outside [0, T]"""
        traj = solve(free_problem, 4)
        with pytest.raises(OutOfRange):
            interpolate(traj, 1.5)
        with pytest.raises(OutOfRange):
            interpolate(traj, -0.1)

    def test_grid_maps(self, free_problem):
        """Test rho(t) and theta(t) bracket t, with (T, T) at the end"""
        traj = solve(free_problem, 4)
        assert grid_maps(traj, 0.3) == pytest.approx((0.25, 0.5))
        assert grid_maps(traj, 0.5) == pytest.approx((0.5, 0.75))
        assert grid_maps(traj, 1.0) == (1.0, 1.0)

    def test_sampled_f(self, free_problem):
        """Test f^n is f at the left node"""
        traj = solve(free_problem, 4)
        np.testing.assert_allclose(sampled_f(free_problem, traj, 1.0), [1.0, -2.0])

    def test_sup_error(self, free_problem, box_problem):
        """Test identical runs are at distance zero and dimensions are checked"""
        a = solve(free_problem, 4)
        b = solve(free_problem, 8)
        assert sup_error(a, b, error_samples(1.0)) == pytest.approx(0.0, abs=1e-14)
        with pytest.raises(DimensionMismatch):
            sup_error(a, solve(SweepingProblem([], lambda t, q: np.zeros(3), np.zeros(3), 1.0), 2), [0.5])
        with pytest.raises(ValueError):
            sup_error(a, solve(box_problem, 4), [0.5])

    def test_error_samples(self):
        """Test t_i = i T / 10"""
        samples = error_samples(4.0)
        assert len(samples) == 10
        assert samples[0] == pytest.approx(0.4)
        assert samples[-1] == 4.0

    def test_summary(self, box_problem):
        """Test the run summary fields"""
        summary = trajectory_summary(solve(box_problem, 10))
        assert summary["n"] == 10
        assert summary["feasibility_margin"] >= -1e-9
        assert summary["max_residual"] <= 1e-10
        assert summary["velocity_bound"] <= math.hypot(1.0, 0.5) + 1e-12


class TestFailures:
    """Test suite for error reporting"""

    def test_step_failure_carries_index(self):
        """Test a constraint failing after t = 0.5 reports the failing step"""
        fragile = Constraint(lambda t, q: q[0] + 1.0 if t < 0.5 else math.nan, lambda t, q: np.ones(1))
        problem = SweepingProblem([fragile], lambda t, q: np.zeros(1), [0.0], 1.0)
        with pytest.raises(StepFailure) as err:
            solve(problem, 10)
        assert err.value.step_index == 4
        assert isinstance(err.value.cause, EvaluationError)

    def test_single_step(self, box_problem):
        """Test one step from the centre"""
        q_next, record = step(box_problem, 0.0, box_problem.initial, 1.0)
        np.testing.assert_allclose(q_next, [1.0, 1.0], atol=1e-10)
        assert record.prediction_distance == pytest.approx(0.5, abs=1e-10)
        assert record.rows == 4


class TestEmpiricalConstants:
    """Test suite for the step-distance ratio and discrete velocity across refinements"""

    def test_lag_ratio_does_not_grow_on_moving_wall(self):
        """Test max_k d(q_k, Qc(t_{k+1}, q_k)) / h stays put as n doubles"""
        problem = BUILTINS["moving-wall-1d"].build()
        ratios = [trajectory_summary(solve(problem, n))["max_lag_ratio"] for n in (5, 10, 20, 40, 80)]
        assert all(later <= earlier + 1e-9 for earlier, later in zip(ratios, ratios[1:]))
        assert ratios[-1] == pytest.approx(1.0)

    def test_crowd_constants_bounded_over_n(self):
        """Test lag ratio and velocity bound on a small crowd stay bounded as n grows"""
        scenario = CrowdScenario(count=4, seed=11)
        problem = build(scenario, horizon=2.0)
        speed_bound = scenario.desired_speed * math.sqrt(scenario.count)
        lag, velocity = [], []
        for n in (10, 20, 40, 80):
            summary = trajectory_summary(solve(problem, n))
            lag.append(summary["max_lag_ratio"])
            velocity.append(summary["velocity_bound"])
        assert max(lag) <= 1e-6
        assert all(v <= speed_bound + 1e-6 for v in velocity)


class TestJammedChain:
    """Test suite for steps whose contact support is linearly dependent"""

    def test_chain_only_slides_sideways(self):
        """Test a jammed chain keeps its x-coordinates and drifts along y"""
        problem = jammed_chain()
        traj = solve(problem, 20)
        for node in traj.nodes:
            np.testing.assert_allclose(node[0::2], problem.initial[0::2], atol=1e-8)
        np.testing.assert_allclose(traj.nodes[-1][1::2], problem.initial[1::2] + 0.25, atol=1e-8)
        assert traj.feasibility_margin >= -problem.feas_tol
        assert trajectory_summary(traj)["max_residual"] <= problem.feas_tol
