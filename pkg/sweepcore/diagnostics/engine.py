#!/usr/bin/env python3
"""
Sweepcore - Assumption Diagnostics
Sampled checks of the constants behind the convergence theory.

- eta = alpha / (M gamma): prox-regularity constant of Q(t)
- Theta = 2 gamma beta / alpha: metric qualification constant
- r = min(4 rho / (13 beta), alpha / (2 M gamma)): qualification radius

Every check is a sampled falsification test. Violations are counted and
reported; none of them stops the solver, which never reads these constants.
Each sample i draws from its own generator seeded with (seed, i), so reports
are reproducible and independent of evaluation order.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from sweepcore.common.exceptions import DegenerateGradients, SweepError
from sweepcore.common.logging import setup_logging
from sweepcore.config import get_config
from sweepcore.core.model import AssumptionParams, SweepingProblem, active_set, is_feasible
from sweepcore.polyproj.engine import distance, linearize, row_distances
from sweepcore.stepper.engine import DiscreteTrajectory

logger = setup_logging("diagnostics")


class DerivedConstants(NamedTuple):
    eta: float
    theta: float
    r_qual: float


@dataclass
class DiagnosticsReport:
    """Flat record of derived constants and sampled verification results."""
    eta: float
    theta: float
    r_qual: float
    gamma_estimate: float
    gradient_norm_range: Tuple[float, float]
    quadratic_bound_violations: int
    qualification_violations: int
    samples_used: int
    seed: int
    gamma_used: float = 1.0
    qualification_samples: int = 0
    degenerate_gradients: bool = False
    errors: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Flat key-value document; non-finite values become None."""
        data = asdict(self)
        low, high = data.pop("gradient_norm_range")
        data["gradient_norm_min"] = low
        data["gradient_norm_max"] = high
        for key, value in data.items():
            if isinstance(value, float) and not math.isfinite(value):
                data[key] = None
        return data


def derived_constants(params: AssumptionParams) -> DerivedConstants:
    """(eta, Theta, r) from the assumption constants."""
    a, b, m, g = params.alpha, params.beta, params.m_bound, params.gamma
    eta = a / (m * g)
    theta = 2.0 * g * b / a
    r_qual = min(4.0 * params.rho / (13.0 * b), a / (2.0 * m * g))
    return DerivedConstants(eta, theta, r_qual)


def sample_ball(center: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the open ball B(center, radius).

    Rejection from the bounding box in low dimension; in high dimension the
    box acceptance rate collapses, so a Gaussian direction with a U^(1/d)
    radius is used instead.
    """
    center = np.asarray(center, dtype=np.float64)
    d = center.size
    if d <= get_config().diagnostics.rejection_max_dim:
        while True:
            u = rng.uniform(-1.0, 1.0, size=d)
            if u @ u < 1.0:
                return center + radius * u
    direction = rng.standard_normal(d)
    direction /= np.linalg.norm(direction)
    return center + radius * rng.uniform() ** (1.0 / d) * direction


def sample_feasible(
    problem: SweepingProblem,
    t: float,
    center: np.ndarray,
    radius: float,
    rng: np.random.Generator,
    attempts: int = 100,
) -> Optional[np.ndarray]:
    """Uniform feasible point of B(center, radius) by rejection; None after `attempts` draws."""
    for _ in range(attempts):
        q = sample_ball(center, radius, rng)
        if is_feasible(problem, t, q):
            return q
    return None


def _ratio(weights: np.ndarray, gradients: np.ndarray, norms: np.ndarray, indices: tuple, floor: float) -> float:
    numerator = float(weights @ norms)
    combined = float(np.linalg.norm(weights @ gradients))
    if combined < floor:
        if numerator > 0:
            raise DegenerateGradients(weights, indices)
        return 1.0
    return numerator / combined


def simplex_gamma(gradients: np.ndarray, grid: Optional[int] = None, indices: tuple = ()) -> float:
    """Grid search of sum lam|grad g| / |sum lam grad g| over the simplex (at most 3 gradients)."""
    cfg = get_config()
    grid = cfg.diagnostics.gamma_grid if grid is None else grid
    gradients = np.atleast_2d(np.asarray(gradients, dtype=np.float64))
    k = gradients.shape[0]
    if k > 3:
        raise ValueError(f"simplex grid search supports at most 3 gradients, got {k}")
    norms = np.linalg.norm(gradients, axis=1)
    indices = indices or tuple(range(k))
    best = 1.0
    if k == 1:
        return best
    for i in range(grid + 1):
        if k == 2:
            weights = [np.array([i, grid - i], dtype=np.float64) / grid]
        else:
            weights = [np.array([i, j, grid - i - j], dtype=np.float64) / grid for j in range(grid - i + 1)]
        for w in weights:
            best = max(best, _ratio(w, gradients, norms, indices, cfg.tolerance.grad_floor))
    return best


def estimate_gamma(
    problem: SweepingProblem,
    t: float,
    q: np.ndarray,
    rho: float,
    trials: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Sampled lower bound for gamma on the rho-active gradients at (t, q).

    Raises:
        DegenerateGradients: a positive combination of active gradients vanishes
    """
    cfg = get_config()
    trials = cfg.diagnostics.gamma_trials if trials is None else trials
    indices = tuple(sorted(active_set(problem, t, q, rho)))
    if len(indices) <= 1:
        return 1.0
    q = np.asarray(q, dtype=np.float64)
    gradients = np.array([problem.constraints[i].gradient(t, q) for i in indices], dtype=np.float64)
    norms = np.linalg.norm(gradients, axis=1)
    floor = cfg.tolerance.grad_floor

    best = 1.0  # coordinate directions
    best = max(best, _ratio(np.ones(len(indices)), gradients, norms, indices, floor))
    for k in range(trials):
        weights = np.random.default_rng([seed, k]).uniform(0.0, 1.0, size=len(indices))
        best = max(best, _ratio(weights, gradients, norms, indices, floor))
    if len(indices) <= 3:
        best = max(best, simplex_gamma(gradients, indices=indices))
    return best


def gradient_norm_range(problem: SweepingProblem, t: float, points: Iterable[np.ndarray]) -> Tuple[float, float]:
    """(min, max) of |grad g_i(t, q)| over all constraints and points (empirical alpha, beta)."""
    low, high = np.inf, 0.0
    for q in points:
        q = np.asarray(q, dtype=np.float64)
        for constraint in problem.constraints:
            norm = float(np.linalg.norm(constraint.gradient(t, q)))
            low, high = min(low, norm), max(high, norm)
    if low == np.inf:
        return 0.0, 0.0
    return low, high


def check_quadratic_distance(
    problem: SweepingProblem, params: AssumptionParams, t: float, q_tilde: np.ndarray, q: np.ndarray
) -> np.ndarray:
    """Per constraint: d_{Qc_i(t, q_tilde)}(q) <= M / (2 alpha) |q - q_tilde|^2 + feas_tol.

    q must be feasible at t.
    """
    q = np.asarray(q, dtype=np.float64)
    q_tilde = np.asarray(q_tilde, dtype=np.float64)
    if not is_feasible(problem, t, q):
        raise ValueError("quadratic distance bound requires a feasible q")
    poly = linearize(problem, t, q_tilde)
    bound = params.m_bound / (2.0 * params.alpha) * float((q - q_tilde) @ (q - q_tilde)) + problem.feas_tol
    return row_distances(q, poly) <= bound


def _qualification_pass(
    problem: SweepingProblem, params: AssumptionParams, t: float, q_tilde: np.ndarray, sample_count: int, seed: int
) -> Tuple[int, int]:
    """(violations, samples actually drawn)."""
    _, theta, r_qual = derived_constants(params)
    q_tilde = np.asarray(q_tilde, dtype=np.float64)
    poly = linearize(problem, t, q_tilde)
    offset = distance(q_tilde, poly)
    if offset > r_qual / 4.0:
        logger.warning(f"q_tilde lies {offset:.3e} from Qc, beyond r/4 = {r_qual / 4.0:.3e}; samples skipped")
        return 0, 0

    violations = 0
    for i in range(sample_count):
        q = sample_ball(q_tilde, r_qual / 4.0, np.random.default_rng([seed, i]))
        lhs = distance(q, poly)
        rhs = theta * float(row_distances(q, poly).sum()) + problem.feas_tol
        if lhs > rhs:
            violations += 1
            logger.debug(f"qualification violated at sample {i}: {lhs:.3e} > {rhs:.3e}")
    return violations, sample_count


def check_metric_qualification(
    problem: SweepingProblem,
    params: AssumptionParams,
    t: float,
    q_tilde: np.ndarray,
    sample_count: Optional[int] = None,
    seed: int = 0,
) -> int:
    """Count samples q in B(q_tilde, r/4) with d_Qc(q) > Theta * sum_i d_{Qc_i}(q)."""
    sample_count = get_config().diagnostics.samples if sample_count is None else sample_count
    violations, _ = _qualification_pass(problem, params, t, q_tilde, sample_count, seed)
    return violations


def estimate_step_distance(traj: DiscreteTrajectory) -> Tuple[float, List[float]]:
    """max_k d_{Qc(t_{k+1}, q_k)}(q_k) / h and the per-step ratios (empirical D)."""
    ratios = [record.lag_distance / traj.h for record in traj.step_stats]
    return max(ratios, default=0.0), ratios


def run_diagnostics(
    problem: SweepingProblem,
    params: AssumptionParams,
    t: float = 0.0,
    q_tilde: Optional[np.ndarray] = None,
    samples: Optional[int] = None,
    seed: int = 0,
    radius: Optional[float] = None,
) -> DiagnosticsReport:
    """Run every check around a base configuration (the initial one by default).

    The derived constants are reported for the gamma actually tested, the
    larger of params.gamma and the sampled estimate.

    Args:
        problem: Sweeping problem
        params: Assumption constants under test
        t: Time of the checks
        q_tilde: Feasible base configuration
        samples: Sample count for both sampled inequalities
        seed: Base seed
        radius: Ball radius for the quadratic bound pairs (r by default)
    """
    cfg = get_config()
    samples = cfg.diagnostics.samples if samples is None else samples
    base = problem.initial if q_tilde is None else np.asarray(q_tilde, dtype=np.float64)
    errors: List[str] = []

    degenerate = False
    try:
        gamma_estimate = estimate_gamma(problem, t, base, params.rho, seed=seed)
    except DegenerateGradients as e:
        degenerate = True
        gamma_estimate = math.inf
        errors.append(f"DegenerateGradients: {e}")
        logger.warning(f"MFCQ fails at the base configuration: {e}")

    tested = params if degenerate else replace(params, gamma=max(params.gamma, gamma_estimate))
    eta, theta, r_qual = derived_constants(tested)
    radius = r_qual if radius is None else radius

    # each pair: feasible q near the base, linearization point q_tilde near q
    points: List[np.ndarray] = [base]
    quadratic_violations = 0
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        q = sample_feasible(problem, t, base, radius, rng)
        if q is None:
            q = base
        point = sample_ball(q, radius, rng)
        points.extend((q, point))
        try:
            quadratic_violations += int(np.count_nonzero(~check_quadratic_distance(problem, params, t, point, q)))
        except SweepError as e:
            errors.append(f"quadratic sample {i}: {e}")
    if quadratic_violations:
        logger.warning(f"{quadratic_violations} quadratic bound violations; M or alpha too small",
                       extra={"violations": quadratic_violations})

    qualification_violations, qualification_samples = 0, 0
    if not degenerate:
        try:
            qualification_violations, qualification_samples = _qualification_pass(
                problem, tested, t, base, samples, seed
            )
        except SweepError as e:
            errors.append(f"qualification: {e}")
        if qualification_violations:
            logger.warning(f"{qualification_violations} metric qualification violations",
                           extra={"violations": qualification_violations})

    return DiagnosticsReport(
        eta=eta,
        theta=theta,
        r_qual=r_qual,
        gamma_estimate=gamma_estimate,
        gradient_norm_range=gradient_norm_range(problem, t, points),
        quadratic_bound_violations=quadratic_violations,
        qualification_violations=qualification_violations,
        samples_used=samples,
        seed=seed,
        gamma_used=tested.gamma,
        qualification_samples=qualification_samples,
        degenerate_gradients=degenerate,
        errors=errors,
    )


def default_params(problem: SweepingProblem, t: float = 0.0, points: Sequence[np.ndarray] = ()) -> AssumptionParams:
    """Placeholder constants for problems without known curvature: empirical alpha, beta; M = rho = 1."""
    low, high = gradient_norm_range(problem, t, [problem.initial, *points])
    if high == 0.0:
        low = high = 1.0
    gamma = 1.0
    try:
        gamma = estimate_gamma(problem, t, problem.initial, 1.0)
    except DegenerateGradients:
        logger.warning("positively dependent gradients at the initial configuration; gamma left at 1")
    return AssumptionParams(alpha=low, beta=high, m_bound=1.0, rho=1.0, gamma=gamma)
