"""Error hierarchy shared by every Sweepcore component."""

from typing import Optional

import numpy as np

__all__ = [
    "SweepError",
    "InvalidProblem",
    "EvaluationError",
    "ZeroGradient",
    "ProjectionError",
    "Infeasible",
    "MaxIterations",
    "NoKktPoint",
    "OutOfRange",
    "DimensionMismatch",
    "FeasibilityViolation",
    "StepFailure",
    "DegenerateGradients",
    "CoincidentCenters",
    "PlacementFailure",
    "ConfigError",
]


class SweepError(Exception):
    """Base exception for Sweepcore"""
    pass


class InvalidProblem(SweepError, ValueError):
    """Raised when a problem or scenario violates its construction invariants"""
    pass


class EvaluationError(SweepError):
    """Raised when a constraint returns a non-finite value"""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"constraint {index} evaluated to non-finite value {value!r}")


class ZeroGradient(SweepError):
    """Raised when a constraint gradient vanishes below grad_floor"""

    def __init__(self, index: int, norm: float):
        self.index = index
        self.norm = norm
        super().__init__(f"gradient of constraint {index} has norm {norm:.3e}")


class ProjectionError(SweepError):
    """Base exception for projection failures"""
    pass


class Infeasible(ProjectionError):
    """Raised when the polyhedron is certified empty"""

    def __init__(self, message: str, certificate: Optional[np.ndarray] = None):
        self.certificate = certificate
        super().__init__(message)


class MaxIterations(ProjectionError):
    """Raised when the KKT residual target was not reached"""

    def __init__(self, best_point: np.ndarray, residual: float, iterations: int):
        self.best_point = best_point
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"projection stopped after {iterations} iterations with residual {residual:.3e}")


class NoKktPoint(ProjectionError):
    """Raised when no active subset yields a KKT point (empty polyhedron)"""
    pass


class OutOfRange(SweepError, ValueError):
    """Raised when a time lies outside [0, T]"""
    pass


class DimensionMismatch(SweepError, ValueError):
    """Raised when configurations of different dimensions are combined"""
    pass


class FeasibilityViolation(SweepError):
    """Raised when a computed node violates a constraint beyond feas_tol"""

    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(f"constraint {index} violated after projection: g = {value:.3e}")


class StepFailure(SweepError):
    """Raised when a time step fails; wraps the underlying error"""

    def __init__(self, step_index: int, cause: SweepError):
        self.step_index = step_index
        self.cause = cause
        super().__init__(f"step {step_index} failed: {cause}")


class DegenerateGradients(SweepError):
    """Raised when a positive combination of active gradients vanishes (MFCQ failure)"""

    def __init__(self, weights: np.ndarray, indices: tuple):
        self.weights = weights
        self.indices = indices
        super().__init__(f"positively dependent gradients on constraints {list(indices)}")


class CoincidentCenters(SweepError):
    """Raised when two disk centres coincide and the distance gradient is undefined"""

    def __init__(self, first, second):
        self.first = first
        self.second = second
        super().__init__(f"coincident centres for {first} and {second}")


class PlacementFailure(SweepError):
    """Raised when rejection sampling cannot place every disk"""
    pass


class ConfigError(SweepError):
    """Raised for malformed run configurations"""
    pass
