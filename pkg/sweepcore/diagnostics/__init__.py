"""Diagnostics - sampled checks of the assumption constants."""

from .engine import (
    DerivedConstants,
    DiagnosticsReport,
    derived_constants,
    estimate_gamma,
    simplex_gamma,
    gradient_norm_range,
    check_quadratic_distance,
    check_metric_qualification,
    estimate_step_distance,
    run_diagnostics,
    default_params,
    sample_ball,
    sample_feasible,
)

__all__ = [
    "DerivedConstants",
    "DiagnosticsReport",
    "derived_constants",
    "estimate_gamma",
    "simplex_gamma",
    "gradient_norm_range",
    "check_quadratic_distance",
    "check_metric_qualification",
    "estimate_step_distance",
    "run_diagnostics",
    "default_params",
    "sample_ball",
    "sample_feasible",
]
