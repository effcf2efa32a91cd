"""Problem model - constraints, feasible set queries and assumption constants."""

from .model import (
    Constraint,
    SweepingProblem,
    AssumptionParams,
    ValidationSummary,
    as_configuration,
    evaluate_all,
    active_set,
    is_feasible,
    gradient_check,
    midpoint_convexity_check,
    validate_problem,
)

__all__ = [
    "Constraint",
    "SweepingProblem",
    "AssumptionParams",
    "ValidationSummary",
    "as_configuration",
    "evaluate_all",
    "active_set",
    "is_feasible",
    "gradient_check",
    "midpoint_convexity_check",
    "validate_problem",
]
