"""Crowd evacuation scenario - rigid disks, walls, door jambs and exit-seeking velocities."""

from .scenario import (
    CrowdScenario,
    disk_constraint,
    wall_constraints,
    spontaneous_velocity,
    place_initial,
    build,
    prune_radius,
    scenario_params,
    mirror,
)

__all__ = [
    "CrowdScenario",
    "disk_constraint",
    "wall_constraints",
    "spontaneous_velocity",
    "place_initial",
    "build",
    "prune_radius",
    "scenario_params",
    "mirror",
]
