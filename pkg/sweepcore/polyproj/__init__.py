"""Polyhedral projection - linearized feasible sets and Euclidean projection onto them."""

from .engine import (
    HalfSpace,
    Polyhedron,
    ProjectionResult,
    linearize,
    project,
    distance,
    distance_single,
    row_distances,
)
from .oracle import project_oracle

__all__ = [
    "HalfSpace",
    "Polyhedron",
    "ProjectionResult",
    "linearize",
    "project",
    "distance",
    "distance_single",
    "row_distances",
    "project_oracle",
]
