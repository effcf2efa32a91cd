"""
Sweepcore - Problem Model
Constraints g_i(t, q) >= 0, the feasible set Q(t) they define, active sets and
the record of assumption constants.

Every constraint must be evaluable and differentiable on all of R^d; the
neighbourhoods U_i(t) of the convergence theory are therefore never represented.
Evaluators must be pure functions: problems are shared freely across threads.

The perturbation f(t, q) must be 1/2-Holder in time for the convergence theory
to apply. Autonomous fields satisfy this trivially.
"""

from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Optional, Sequence, Tuple

import numpy as np

from sweepcore.common.exceptions import DimensionMismatch, EvaluationError, InvalidProblem
from sweepcore.config import get_config

ValueFn = Callable[[float, np.ndarray], float]
GradientFn = Callable[[float, np.ndarray], np.ndarray]
Perturbation = Callable[[float, np.ndarray], np.ndarray]


def as_configuration(values, dim: Optional[int] = None) -> np.ndarray:
    """Validate and freeze a configuration vector.

    Args:
        values: Sequence of coordinates
        dim: Expected dimension, if known

    Returns:
        Read-only float64 array of shape (d,)
    """
    q = np.array(values, dtype=np.float64).reshape(-1)
    if q.size < 1:
        raise InvalidProblem("configuration must have dimension >= 1")
    if dim is not None and q.size != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {q.size}")
    if not np.all(np.isfinite(q)):
        raise InvalidProblem("configuration has non-finite entries")
    q.flags.writeable = False
    return q


@dataclass(frozen=True)
class Constraint:
    """One inequality g(t, q) >= 0 with its spatial gradient."""
    value: ValueFn
    gradient: GradientFn
    time_derivative: Optional[ValueFn] = None
    name: str = ""

    def __call__(self, t: float, q: np.ndarray) -> float:
        return float(self.value(t, q))


@dataclass(frozen=True)
class SweepingProblem:
    """Data of the perturbed sweeping process dq/dt + N(Q(t), q) contains f(t, q)."""
    constraints: Tuple[Constraint, ...]
    perturbation: Perturbation
    initial: np.ndarray
    horizon: float
    feas_tol: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "initial", as_configuration(self.initial))
        if self.feas_tol is None:
            object.__setattr__(self, "feas_tol", get_config().tolerance.feas_tol)
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidProblem(f"horizon must be positive, got {self.horizon}")
        values = evaluate_all(self, 0.0, self.initial)
        if values.size and values.min() < -self.feas_tol:
            worst = int(np.argmin(values))
            raise InvalidProblem(
                f"initial configuration infeasible: constraint {worst} has g = {values[worst]:.3e}"
            )

    @property
    def dimension(self) -> int:
        return int(self.initial.size)

    @property
    def size(self) -> int:
        """Number of constraints p."""
        return len(self.constraints)


@dataclass(frozen=True)
class AssumptionParams:
    """Constants of the standing assumptions, supplied per scenario.

    alpha, beta bound the constraint gradients, m_bound bounds the second
    derivatives, rho and gamma quantify positive-linear independence of the
    rho-active gradients, c_margin is the neighbourhood margin and k_lip the
    Lipschitz constant of t -> Q(t).
    """
    alpha: float
    beta: float
    m_bound: float
    rho: float
    gamma: float = 1.0
    c_margin: float = 1.0
    k_lip: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "m_bound", "rho", "gamma", "c_margin", "k_lip"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidProblem(f"{name} must be strictly positive, got {value}")
        if self.alpha > self.beta:
            raise InvalidProblem(f"alpha ({self.alpha}) must not exceed beta ({self.beta})")
        if self.gamma < 1:
            raise InvalidProblem(f"gamma must be >= 1, got {self.gamma}")


def _check_dimension(problem: SweepingProblem, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (problem.dimension,):
        raise DimensionMismatch(f"expected dimension {problem.dimension}, got shape {q.shape}")
    return q


def evaluate_all(problem: SweepingProblem, t: float, q: np.ndarray) -> np.ndarray:
    """Evaluate every constraint g_i(t, q).

    Raises:
        EvaluationError: if some g_i is NaN or infinite
    """
    q = _check_dimension(problem, q)
    values = np.empty(problem.size)
    for i, constraint in enumerate(problem.constraints):
        value = constraint(t, q)
        if not np.isfinite(value):
            raise EvaluationError(i, value)
        values[i] = value
    return values


def active_set(problem: SweepingProblem, t: float, q: np.ndarray, rho: float = 0.0) -> FrozenSet[int]:
    """Indices i with g_i(t, q) <= rho (up to feas_tol).

    Infeasible q is accepted so diagnostics can inspect violated states.
    """
    if rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    values = evaluate_all(problem, t, q)
    return frozenset(int(i) for i in np.flatnonzero(values <= rho + problem.feas_tol))


def is_feasible(problem: SweepingProblem, t: float, q: np.ndarray, tol: Optional[float] = None) -> bool:
    """True iff min_i g_i(t, q) >= -tol."""
    tol = problem.feas_tol if tol is None else tol
    values = evaluate_all(problem, t, q)
    return bool(values.size == 0 or values.min() >= -tol)


def gradient_check(constraint: Constraint, t: float, q: np.ndarray, step: Optional[float] = None) -> float:
    """Max deviation between central finite differences and the analytic gradient."""
    step = get_config().diagnostics.fd_step if step is None else step
    q = np.asarray(q, dtype=np.float64)
    analytic = np.asarray(constraint.gradient(t, q), dtype=np.float64)
    if analytic.shape != q.shape:
        raise DimensionMismatch(f"gradient has shape {analytic.shape}, configuration {q.shape}")
    worst = 0.0
    for k in range(q.size):
        forward = q.copy()
        backward = q.copy()
        forward[k] += step
        backward[k] -= step
        fd = (constraint(t, forward) - constraint(t, backward)) / (2.0 * step)
        worst = max(worst, abs(fd - analytic[k]))
    return worst


def midpoint_convexity_check(
    constraint: Constraint, t: float, points_a: Sequence[np.ndarray], points_b: Sequence[np.ndarray]
) -> float:
    """Largest violation of g((x+y)/2) <= (g(x)+g(y))/2 over the given pairs (0 if convex)."""
    worst = 0.0
    for x, y in zip(points_a, points_b):
        mid = constraint(t, 0.5 * (np.asarray(x) + np.asarray(y)))
        chord = 0.5 * (constraint(t, x) + constraint(t, y))
        worst = max(worst, mid - chord)
    return worst


@dataclass
class ValidationSummary:
    """Outcome of sampled constraint validation."""
    max_gradient_error: float = 0.0
    max_convexity_violation: float = 0.0
    worst_gradient_constraint: int = -1
    worst_convexity_constraint: int = -1
    samples: int = 0
    per_constraint_gradient: list = field(default_factory=list)


def validate_problem(
    problem: SweepingProblem,
    lower: np.ndarray,
    upper: np.ndarray,
    samples: int = 100,
    seed: int = 0,
    t_range: Tuple[float, float] = (0.0, 0.0),
    step: Optional[float] = None,
) -> ValidationSummary:
    """Sample (t, q) in a box and run the gradient and midpoint-convexity checks on every constraint."""
    rng = np.random.default_rng(seed)
    lower = np.broadcast_to(np.asarray(lower, dtype=np.float64), (problem.dimension,))
    upper = np.broadcast_to(np.asarray(upper, dtype=np.float64), (problem.dimension,))
    summary = ValidationSummary(samples=samples)
    times = rng.uniform(t_range[0], t_range[1], size=samples) if t_range[1] > t_range[0] else np.full(samples, t_range[0])
    xs = rng.uniform(lower, upper, size=(samples, problem.dimension))
    ys = rng.uniform(lower, upper, size=(samples, problem.dimension))

    for i, constraint in enumerate(problem.constraints):
        grad_err = max(gradient_check(constraint, t, x, step) for t, x in zip(times, xs))
        convex_err = max(
            midpoint_convexity_check(constraint, t, [x], [y]) for t, x, y in zip(times, xs, ys)
        )
        summary.per_constraint_gradient.append(grad_err)
        if grad_err > summary.max_gradient_error:
            summary.max_gradient_error = grad_err
            summary.worst_gradient_constraint = i
        if convex_err > summary.max_convexity_violation:
            summary.max_convexity_violation = convex_err
            summary.worst_convexity_constraint = i
    return summary
