"""
Analytic scenarios with closed-form sweeping solutions, used by the CLI and the test suite.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from sweepcore.core.model import Constraint, SweepingProblem
from sweepcore.crowd.scenario import disk_constraint


@dataclass(frozen=True)
class Builtin:
    """Problem factory with its default horizon and exact solution."""
    name: str
    horizon: float
    factory: Callable[[float], SweepingProblem]
    exact: Optional[Callable[[float], np.ndarray]] = None

    def build(self, horizon: Optional[float] = None) -> SweepingProblem:
        return self.factory(self.horizon if horizon is None else horizon)


def _constant(value):
    field_value = np.asarray(value, dtype=np.float64)
    return lambda t, q: field_value


def moving_wall_1d(horizon: float) -> SweepingProblem:
    """g(t, q) = q - t pushes a resting point: q(t) = t."""
    wall = Constraint(lambda t, q: q[0] - t, lambda t, q: np.ones(1), lambda t, q: -1.0, name="wall")
    return SweepingProblem([wall], _constant([0.0]), [0.0], horizon, name="moving-wall-1d")


def static_wall_push_1d(horizon: float) -> SweepingProblem:
    """f = -1 against the wall q >= 0: q(t) = max(1 - t, 0)."""
    wall = Constraint(lambda t, q: q[0], lambda t, q: np.ones(1), lambda t, q: 0.0, name="wall")
    return SweepingProblem([wall], _constant([-1.0]), [1.0], horizon, name="static-wall-push-1d")


def two_disk_headon(horizon: float) -> SweepingProblem:
    """Two disks r = 0.2 pushed towards each other; contact at t = 0.8."""
    return SweepingProblem(
        [disk_constraint(0, 1, 0.2)], _constant([1.0, 0.0, -1.0, 0.0]), [-1.0, 0.0, 1.0, 0.0], horizon,
        name="two-disk-headon",
    )


def halfplane_sweep_2d(horizon: float) -> SweepingProblem:
    """g(t, q) = q_2 - t with f = (1, 0): q(t) = (t, t)."""
    plane = Constraint(lambda t, q: q[1] - t, lambda t, q: np.array([0.0, 1.0]), lambda t, q: -1.0, name="plane")
    return SweepingProblem([plane], _constant([1.0, 0.0]), [0.0, 0.0], horizon, name="halfplane-sweep-2d")


def _headon_exact(t: float) -> np.ndarray:
    s = min(t, 0.8)
    return np.array([-1.0 + s, 0.0, 1.0 - s, 0.0])


BUILTINS: Dict[str, Builtin] = {
    "moving-wall-1d": Builtin("moving-wall-1d", 1.0, moving_wall_1d, lambda t: np.array([t])),
    "static-wall-push-1d": Builtin(
        "static-wall-push-1d", 2.0, static_wall_push_1d, lambda t: np.array([max(1.0 - t, 0.0)])
    ),
    "two-disk-headon": Builtin("two-disk-headon", 2.0, two_disk_headon, _headon_exact),
    "halfplane-sweep-2d": Builtin("halfplane-sweep-2d", 1.0, halfplane_sweep_2d, lambda t: np.array([t, t])),
}
