#!/usr/bin/env python3
"""
Sweepcore - Prediction-Correction Time Stepping

    q_{k+1} = P_{Qc(t_{k+1}, q_k)} ( q_k + h f(t_k, q_k) )

on the uniform grid t_k = k h, h = T / n. Every node is feasible because
Qc(t, q) is an inner approximation of Q(t) when the g_i are convex.

The recurrence is serial in k; independent solves share nothing and may run
in parallel.
"""

import time
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from sweepcore.common.exceptions import (
    DimensionMismatch,
    FeasibilityViolation,
    OutOfRange,
    StepFailure,
    SweepError,
)
from sweepcore.common.logging import setup_logging
from sweepcore.config import get_config
from sweepcore.core.model import SweepingProblem, evaluate_all
from sweepcore.polyproj.engine import linearize, project, distance

logger = setup_logging("stepper")

F_SAMPLING_MODES = ("left", "averaged")


@dataclass(frozen=True)
class StepRecord:
    """Per-step statistics of the projection."""
    iterations: int
    residual: float
    prediction_distance: float  # d_Qc(q_k + h f)
    lag_distance: float  # d_{Qc(t_{k+1}, q_k)}(q_k)
    displacement: float  # |q_{k+1} - q_k|
    min_value: float  # min_i g_i(t_{k+1}, q_{k+1})
    rows: int
    multipliers: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DiscreteTrajectory:
    """Nodes q_k on t_k = k h together with their step statistics."""
    n: int
    h: float
    horizon: float
    nodes: np.ndarray
    times: np.ndarray
    step_stats: Tuple[StepRecord, ...]
    initial_margin: float = np.inf
    f_sampling: str = "left"

    @property
    def dimension(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def velocity_bound(self) -> float:
        """Empirical K: max_k |q_{k+1} - q_k| / h."""
        if not self.step_stats:
            return 0.0
        return max(r.displacement for r in self.step_stats) / self.h

    @property
    def feasibility_margin(self) -> float:
        """min over k, i of g_i(t_k, q_k)."""
        margins = [r.min_value for r in self.step_stats]
        return float(min([self.initial_margin, *margins]))


def _averaged_field(problem: SweepingProblem, t: float, q: np.ndarray, h: float, points: int) -> np.ndarray:
    """(1/h) int_t^{t+h} f(s, q) ds by Gauss-Legendre quadrature."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    total = np.zeros_like(q)
    for x, w in zip(nodes, weights):
        total += w * np.asarray(problem.perturbation(t + 0.5 * h * (1.0 + x), q), dtype=np.float64)
    return 0.5 * total


def _field(problem: SweepingProblem, t: float, q: np.ndarray, h: float, f_sampling: str) -> np.ndarray:
    if f_sampling == "left":
        return np.asarray(problem.perturbation(t, q), dtype=np.float64).reshape(q.shape)
    if f_sampling == "averaged":
        return _averaged_field(problem, t, q, h, get_config().stepper.quadrature_points)
    raise ValueError(f"unknown f_sampling {f_sampling!r}; expected one of {F_SAMPLING_MODES}")


def step(
    problem: SweepingProblem,
    t_k: float,
    q_k: np.ndarray,
    h: float,
    warm_start: Optional[np.ndarray] = None,
    f_sampling: Optional[str] = None,
    indices: Optional[Sequence[int]] = None,
    t_next: Optional[float] = None,
) -> Tuple[np.ndarray, StepRecord]:
    """One prediction-correction step.

    Args:
        problem: Sweeping problem
        t_k: Current time
        q_k: Current (feasible) node
        h: Step size
        warm_start: Multipliers of the previous step, one per linearized row
        f_sampling: "left" (default) or "averaged"
        indices: Constraint subset to linearize (all when None)
        t_next: Exact grid time t_{k+1}; defaults to t_k + h

    Returns:
        (q_{k+1}, StepRecord)

    Raises:
        Infeasible, MaxIterations: from the projection
        FeasibilityViolation: the new node violates a constraint beyond feas_tol
    """
    cfg = get_config()
    f_sampling = f_sampling or cfg.stepper.f_sampling
    q_k = np.asarray(q_k, dtype=np.float64)
    if q_k.shape != (problem.dimension,):
        raise DimensionMismatch(f"expected dimension {problem.dimension}, got shape {q_k.shape}")
    t_next = t_k + h if t_next is None else t_next

    prediction = q_k + h * _field(problem, t_k, q_k, h, f_sampling)
    poly = linearize(problem, t_next, q_k, indices=indices)
    result = project(prediction, poly, warm_start=warm_start)
    q_next = result.point

    # q_k lies in Qc(t_{k+1}, q_k) exactly when every g_i(t_{k+1}, q_k) >= 0
    if poly.size == 0 or poly.values.min() >= 0.0:
        lag = 0.0
    else:
        lag = distance(q_k, poly)

    if cfg.stepper.check_feasibility and problem.size:
        values = evaluate_all(problem, t_next, q_next)
        worst = int(np.argmin(values))
        min_value = float(values[worst])
        if min_value < -problem.feas_tol:
            raise FeasibilityViolation(worst, min_value)
    else:
        min_value = np.inf

    record = StepRecord(
        iterations=result.iterations,
        residual=result.residual,
        prediction_distance=float(np.linalg.norm(prediction - q_next)),
        lag_distance=float(lag),
        displacement=float(np.linalg.norm(q_next - q_k)),
        min_value=min_value,
        rows=poly.size,
        multipliers=result.multipliers,
    )
    return q_next, record


def solve(
    problem: SweepingProblem,
    n: int,
    f_sampling: Optional[str] = None,
    prune_radius: Optional[float] = None,
    on_step: Optional[Callable[[int, float, np.ndarray], None]] = None,
) -> DiscreteTrajectory:
    """Run the scheme with n uniform steps on [0, T].

    Args:
        problem: Sweeping problem
        n: Number of steps
        f_sampling: "left" or "averaged" (config default when None)
        prune_radius: When set, constraints with g_i(t_{k+1}, q_k) above this
            value are left out of the step polyhedron; a step whose result is
            infeasible is redone with every constraint
        on_step: Callback (k, t_k, q_k) invoked for every node, including k = 0

    Raises:
        StepFailure: carrying the failing step index and the underlying error
    """
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    cfg = get_config()
    f_sampling = f_sampling or cfg.stepper.f_sampling
    if f_sampling not in F_SAMPLING_MODES:
        raise ValueError(f"unknown f_sampling {f_sampling!r}; expected one of {F_SAMPLING_MODES}")

    h = problem.horizon / n
    times = np.arange(n + 1) * h
    times[-1] = problem.horizon
    nodes = np.empty((n + 1, problem.dimension))
    nodes[0] = problem.initial
    initial_values = evaluate_all(problem, 0.0, problem.initial)
    initial_margin = float(initial_values.min()) if initial_values.size else np.inf
    if on_step is not None:
        on_step(0, 0.0, nodes[0])

    multipliers = np.zeros(problem.size)
    records: List[StepRecord] = []
    started = time.perf_counter()

    for k in range(n):
        q_k = nodes[k]
        try:
            indices = None
            if prune_radius is not None and problem.size:
                values = evaluate_all(problem, times[k + 1], q_k)
                indices = np.flatnonzero(values <= prune_radius)
            warm = multipliers if indices is None else multipliers[indices]
            try:
                q_next, record = step(problem, times[k], q_k, h, warm_start=warm,
                                      f_sampling=f_sampling, indices=indices, t_next=times[k + 1])
            except FeasibilityViolation:
                if indices is None:
                    raise
                logger.debug(f"Pruned step {k} infeasible, redoing with all constraints", extra={"step": k})
                indices = None
                q_next, record = step(problem, times[k], q_k, h, warm_start=multipliers,
                                      f_sampling=f_sampling, t_next=times[k + 1])
        except SweepError as e:
            logger.error(f"Step {k} failed: {e}", extra={"step": k, "n": n, "h": h})
            raise StepFailure(k, e) from e

        if indices is None:
            multipliers = record.multipliers.copy()
        else:
            multipliers = np.zeros(problem.size)
            multipliers[indices] = record.multipliers
        nodes[k + 1] = q_next
        records.append(replace(record, multipliers=None))
        logger.debug(
            f"step {k}: {record.iterations} iterations, residual {record.residual:.2e}",
            extra={"step": k, "iterations": record.iterations, "residual": record.residual},
        )
        if on_step is not None:
            on_step(k + 1, times[k + 1], q_next)

    duration_ms = 1000.0 * (time.perf_counter() - started)
    logger.info(f"Solved n={n} (h={h:.4g}) in {duration_ms:.0f} ms",
                extra={"n": n, "h": h, "duration_ms": round(duration_ms, 1)})

    nodes.flags.writeable = False
    times.flags.writeable = False
    return DiscreteTrajectory(
        n=n,
        h=h,
        horizon=problem.horizon,
        nodes=nodes,
        times=times,
        step_stats=tuple(records),
        initial_margin=initial_margin,
        f_sampling=f_sampling,
    )


def _locate(traj: DiscreteTrajectory, t: float) -> int:
    """Index k with t in [t_k, t_{k+1}); n when t = T."""
    slack = 1e-12 * max(1.0, traj.horizon)
    if not (-slack <= t <= traj.horizon + slack):
        raise OutOfRange(f"time {t} outside [0, {traj.horizon}]")
    if t >= traj.horizon:
        return traj.n
    k = int(np.searchsorted(traj.times, t, side="right")) - 1
    return min(max(k, 0), traj.n)


def interpolate(traj: DiscreteTrajectory, t: float) -> np.ndarray:
    """Piecewise linear interpolant q^n(t); exact at the nodes."""
    k = _locate(traj, t)
    if k == traj.n or t == traj.times[k]:
        return traj.nodes[k].copy()
    t0, t1 = traj.times[k], traj.times[k + 1]
    w = (t - t0) / (t1 - t0)
    return (1.0 - w) * traj.nodes[k] + w * traj.nodes[k + 1]


def grid_maps(traj: DiscreteTrajectory, t: float) -> Tuple[float, float]:
    """(rho(t), theta(t)) = (t_k, t_{k+1}) on [t_k, t_{k+1}); (T, T) at t = T."""
    k = _locate(traj, t)
    if k == traj.n:
        return traj.horizon, traj.horizon
    return float(traj.times[k]), float(traj.times[k + 1])


def sampled_f(problem: SweepingProblem, traj: DiscreteTrajectory, t: float) -> np.ndarray:
    """Piecewise constant f^n(t) = f(t_k, q_k); f(t_{n-1}, q_{n-1}) at t = T."""
    k = min(_locate(traj, t), traj.n - 1)
    return _field(problem, float(traj.times[k]), traj.nodes[k], traj.h, traj.f_sampling)


def sup_error(a: DiscreteTrajectory, b: DiscreteTrajectory, samples: Sequence[float]) -> float:
    """max over samples of |q_a(t) - q_b(t)|."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"trajectories of dimension {a.dimension} and {b.dimension}")
    if not np.isclose(a.horizon, b.horizon):
        raise ValueError(f"trajectories have horizons {a.horizon} and {b.horizon}")
    errors = [float(np.linalg.norm(interpolate(a, t) - interpolate(b, t))) for t in samples]
    return max(errors, default=0.0)


def error_samples(horizon: float, count: Optional[int] = None) -> List[float]:
    """t_i = i T / count for i = 1..count."""
    count = get_config().convergence.error_samples if count is None else count
    return [i * horizon / count for i in range(1, count + 1)]


def exact_error(
    traj: DiscreteTrajectory, exact: Callable[[float], np.ndarray], samples: Optional[Sequence[float]] = None
) -> float:
    """max |q^n(t) - q(t)| against a known solution; defaults to every node."""
    samples = traj.times if samples is None else samples
    return max(
        (float(np.linalg.norm(interpolate(traj, t) - np.asarray(exact(t), dtype=np.float64))) for t in samples),
        default=0.0,
    )


def trajectory_summary(traj: DiscreteTrajectory) -> dict:
    """Run statistics written next to every trajectory."""
    stats = traj.step_stats
    return {
        "n": traj.n,
        "h": traj.h,
        "horizon": traj.horizon,
        "dimension": traj.dimension,
        "f_sampling": traj.f_sampling,
        "feasibility_margin": traj.feasibility_margin,
        "max_displacement": max((r.displacement for r in stats), default=0.0),
        "velocity_bound": traj.velocity_bound,
        "max_prediction_distance": max((r.prediction_distance for r in stats), default=0.0),
        "max_lag_ratio": max((r.lag_distance for r in stats), default=0.0) / traj.h,
        "total_iterations": int(sum(r.iterations for r in stats)),
        "max_iterations": max((r.iterations for r in stats), default=0),
        "max_residual": max((r.residual for r in stats), default=0.0),
    }
