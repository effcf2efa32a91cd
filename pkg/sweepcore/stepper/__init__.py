"""Stepper - prediction-correction scheme, discrete trajectories and their interpolants."""

from .engine import (
    StepRecord,
    DiscreteTrajectory,
    step,
    solve,
    interpolate,
    grid_maps,
    sampled_f,
    sup_error,
    error_samples,
    exact_error,
    trajectory_summary,
)

__all__ = [
    "StepRecord",
    "DiscreteTrajectory",
    "step",
    "solve",
    "interpolate",
    "grid_maps",
    "sampled_f",
    "sup_error",
    "error_samples",
    "exact_error",
    "trajectory_summary",
]
