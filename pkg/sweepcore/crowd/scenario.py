#!/usr/bin/env python3
"""
Sweepcore - Crowd Evacuation Scenario
Rigid disks of radius r in a rectangular room, heading for a door.

Configuration q = (q_1, ..., q_N) in R^{2N}. Constraints:
- pairs:  D_ij(q) = |q_i - q_j| - 2r >= 0
- walls:  distance from each centre to the three closed walls >= r
- jambs:  the exit wall is replaced by two convex door-post obstacles,
          |q_i - c_k| - (r + jamb_radius) >= 0, so every constraint stays convex

Disks that leave the room keep every constraint; d never changes during a run.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from sweepcore.common.exceptions import CoincidentCenters, InvalidProblem, PlacementFailure
from sweepcore.common.logging import setup_logging
from sweepcore.config import get_config
from sweepcore.core.model import AssumptionParams, Constraint, SweepingProblem, as_configuration
from sweepcore.diagnostics.engine import estimate_gamma

logger = setup_logging("crowd")

WALLS = ("left", "right", "bottom", "top")
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class CrowdScenario:
    """Room, disks and exit of an evacuation run (lengths in metres, speeds in m/s)."""
    count: int
    radius: float = 0.2
    room: Tuple[float, float] = (10.0, 10.0)
    exit_center: Tuple[float, float] = (10.0, 5.0)
    door_width: float = 1.2
    jamb_radius: float = 0.2
    desired_speed: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "room", tuple(float(v) for v in self.room))
        object.__setattr__(self, "exit_center", tuple(float(v) for v in self.exit_center))
        width, height = self.room
        if self.count < 1:
            raise InvalidProblem(f"count must be >= 1, got {self.count}")
        if self.radius <= 0 or self.desired_speed <= 0 or self.door_width <= 0:
            raise InvalidProblem("radius, desired_speed and door_width must be positive")
        if self.jamb_radius < 0:
            raise InvalidProblem(f"jamb_radius must be nonnegative, got {self.jamb_radius}")
        if width <= 2 * self.radius or height <= 2 * self.radius:
            raise InvalidProblem(f"room {self.room} too small for disks of radius {self.radius}")
        if self.count * (2 * self.radius) ** 2 > (width - 2 * self.radius) * (height - 2 * self.radius):
            raise InvalidProblem(f"{self.count} disks of radius {self.radius} cannot be packed in {self.room}")
        _ = self.exit_wall  # raises for an exit off the walls

    @property
    def exit_wall(self) -> str:
        """Wall carrying the exit; raises when the exit is not on a wall segment."""
        width, height = self.room
        x, y = self.exit_center
        tol = 1e-9 * max(width, height)
        if abs(x) <= tol and 0 <= y <= height:
            return "left"
        if abs(x - width) <= tol and 0 <= y <= height:
            return "right"
        if abs(y) <= tol and 0 <= x <= width:
            return "bottom"
        if abs(y - height) <= tol and 0 <= x <= width:
            return "top"
        raise InvalidProblem(f"exit {self.exit_center} does not lie on a wall of room {self.room}")

    @property
    def outward_normal(self) -> np.ndarray:
        return {
            "left": np.array([-1.0, 0.0]),
            "right": np.array([1.0, 0.0]),
            "bottom": np.array([0.0, -1.0]),
            "top": np.array([0.0, 1.0]),
        }[self.exit_wall]

    @property
    def jamb_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Door posts at exit_center -/+ door_width / 2 along the exit wall."""
        normal = self.outward_normal
        tangent = np.array([-normal[1], normal[0]])
        center = np.asarray(self.exit_center)
        half = 0.5 * self.door_width
        return center - half * tangent, center + half * tangent

    @property
    def dimension(self) -> int:
        return 2 * self.count


def disk_constraint(i: int, j: int, radius: float) -> Constraint:
    """D_ij(q) = |q_i - q_j| - 2r with gradient e at block i and -e at block j."""
    if not 0 <= i < j:
        raise ValueError(f"disk constraint needs 0 <= i < j, got ({i}, {j})")
    si, sj = slice(2 * i, 2 * i + 2), slice(2 * j, 2 * j + 2)
    floor = get_config().tolerance.grad_floor

    def value(t, q):
        return math.hypot(q[2 * i] - q[2 * j], q[2 * i + 1] - q[2 * j + 1]) - 2.0 * radius

    def gradient(t, q):
        diff = q[si] - q[sj]
        dist = math.hypot(diff[0], diff[1])
        if dist < floor:
            raise CoincidentCenters(i, j)
        e = diff / dist
        grad = np.zeros(q.shape[0])
        grad[si] = e
        grad[sj] = -e
        return grad

    return Constraint(value, gradient, lambda t, q: 0.0, name=f"pair[{i},{j}]")


def _wall_constraint(i: int, axis: int, sign: float, level: float, wall: str) -> Constraint:
    """sign * (q_{i,axis} - level) >= 0."""
    k = 2 * i + axis

    def value(t, q):
        return sign * (q[k] - level)

    def gradient(t, q):
        grad = np.zeros(q.shape[0])
        grad[k] = sign
        return grad

    return Constraint(value, gradient, lambda t, q: 0.0, name=f"wall[{i},{wall}]")


def _jamb_constraint(i: int, center: np.ndarray, reach: float, label: str) -> Constraint:
    """|q_i - c| - reach >= 0 for a point obstacle inflated to reach."""
    si = slice(2 * i, 2 * i + 2)
    cx, cy = float(center[0]), float(center[1])
    floor = get_config().tolerance.grad_floor

    def value(t, q):
        return math.hypot(q[2 * i] - cx, q[2 * i + 1] - cy) - reach

    def gradient(t, q):
        diff = q[si] - (cx, cy)
        dist = math.hypot(diff[0], diff[1])
        if dist < floor:
            raise CoincidentCenters(i, label)
        grad = np.zeros(q.shape[0])
        grad[si] = diff / dist
        return grad

    return Constraint(value, gradient, lambda t, q: 0.0, name=f"{label}[{i}]")


def wall_constraints(scenario: CrowdScenario) -> List[Constraint]:
    """Wall constraints for the three closed walls and jamb constraints at the door, per disk."""
    width, height = scenario.room
    r = scenario.radius
    walls = {
        "left": (0, 1.0, r),
        "right": (0, -1.0, width - r),
        "bottom": (1, 1.0, r),
        "top": (1, -1.0, height - r),
    }
    exit_wall = scenario.exit_wall
    jambs = scenario.jamb_centers
    reach = r + scenario.jamb_radius

    constraints = []
    for i in range(scenario.count):
        for wall in WALLS:
            if wall != exit_wall:
                axis, sign, level = walls[wall]
                constraints.append(_wall_constraint(i, axis, sign, level, wall))
        for k, center in enumerate(jambs):
            constraints.append(_jamb_constraint(i, center, reach, f"jamb{k}"))
    return constraints


def spontaneous_velocity(scenario: CrowdScenario, q: np.ndarray) -> np.ndarray:
    """Straight-line exit-seeking velocity; constant outward once past the door plane."""
    floor = get_config().tolerance.grad_floor
    centers = np.asarray(q, dtype=np.float64).reshape(scenario.count, 2)
    target = np.asarray(scenario.exit_center)
    outward = scenario.outward_normal

    offsets = target - centers
    dists = np.hypot(offsets[:, 0], offsets[:, 1])
    velocity = np.zeros_like(centers)
    moving = dists >= floor
    velocity[moving] = scenario.desired_speed * offsets[moving] / dists[moving, None]
    passed = (centers - target) @ outward > 0.0
    velocity[passed] = scenario.desired_speed * outward
    return velocity.reshape(-1)


def place_initial(scenario: CrowdScenario) -> np.ndarray:
    """Seeded rejection sampling of non-overlapping centres with a strict margin.

    Raises:
        PlacementFailure: after max_rejections rejected draws
    """
    cfg = get_config().crowd
    rng = np.random.default_rng(scenario.seed)
    width, height = scenario.room
    r = scenario.radius
    margin = cfg.placement_margin_ratio * r
    low = np.array([r + margin, r + margin])
    high = np.array([width - r - margin, height - r - margin])
    jambs = np.array(scenario.jamb_centers)
    jamb_clearance = r + scenario.jamb_radius + margin
    pair_clearance = 2 * r + margin

    centers = np.empty((scenario.count, 2))
    placed = 0
    rejected = 0
    while placed < scenario.count:
        draw = rng.uniform(low, high)
        too_close = placed and np.min(np.hypot(*(centers[:placed] - draw).T)) <= pair_clearance
        on_jamb = np.min(np.hypot(*(jambs - draw).T)) <= jamb_clearance
        if too_close or on_jamb:
            rejected += 1
            if rejected >= cfg.max_rejections:
                raise PlacementFailure(
                    f"placed {placed} of {scenario.count} disks before {rejected} rejections"
                )
            continue
        centers[placed] = draw
        placed += 1
    logger.debug(f"Placed {scenario.count} disks with {rejected} rejections")
    return as_configuration(centers.reshape(-1))


def build(scenario: CrowdScenario, horizon: float = 4.0, initial: Optional[np.ndarray] = None) -> SweepingProblem:
    """Assemble the crowd sweeping problem in R^{2N}."""
    pairs = [
        disk_constraint(i, j, scenario.radius)
        for i in range(scenario.count)
        for j in range(i + 1, scenario.count)
    ]
    constraints = pairs + wall_constraints(scenario)
    q0 = place_initial(scenario) if initial is None else as_configuration(initial, scenario.dimension)

    def perturbation(t, q):
        return spontaneous_velocity(scenario, q)

    logger.info(f"Crowd scenario: {scenario.count} disks, {len(pairs)} pairs, {len(constraints)} constraints")
    return SweepingProblem(constraints, perturbation, q0, horizon, name="crowd")


def prune_radius(scenario: CrowdScenario, h: float) -> float:
    """Gap beyond which a constraint cannot close within one step of size h."""
    return 2.0 * scenario.desired_speed * h + get_config().crowd.prune_safety


def scenario_params(
    scenario: CrowdScenario, problem: Optional[SweepingProblem] = None, sample_radius: Optional[float] = None
) -> AssumptionParams:
    """Assumption constants derived from the geometry.

    Gradient norms are sqrt(2) for pairs and 1 for walls and jambs, so
    alpha = 1 and beta = sqrt(2) (sqrt(2) for both when only pairs exist).
    M bounds the curvature of pair and jamb constraints at the smallest
    separation reachable from a feasible point within sample_radius (r/2 by
    default). rho = r; gamma is estimated at the initial configuration.
    """
    r = scenario.radius
    delta = 0.5 * r if sample_radius is None else sample_radius
    reach = r + scenario.jamb_radius
    alpha = 1.0
    beta = SQRT2 if scenario.count > 1 else 1.0

    if reach <= delta or (scenario.count > 1 and 2 * r <= SQRT2 * delta):
        raise InvalidProblem(f"sample radius {delta} too large for radius {r}")
    curvature = alpha / (reach - delta)
    if scenario.count > 1:
        curvature = max(curvature, alpha * SQRT2 / (2 * r - SQRT2 * delta))

    problem = build(scenario) if problem is None else problem
    gamma = estimate_gamma(problem, 0.0, problem.initial, r)
    return AssumptionParams(
        alpha=alpha,
        beta=beta,
        m_bound=curvature,
        rho=r,
        gamma=gamma,
        c_margin=r,
        k_lip=1.0,
    )


def mirror(scenario: CrowdScenario, q: np.ndarray) -> np.ndarray:
    """Reflect every centre across the axis through the exit, normal to the exit wall.

    The room must be symmetric about that axis (exit centred on its wall).
    """
    width, height = scenario.room
    x, y = scenario.exit_center
    centers = np.asarray(q, dtype=np.float64).reshape(scenario.count, 2).copy()
    if scenario.exit_wall in ("left", "right"):
        if not math.isclose(y, 0.5 * height):
            raise ValueError("mirror symmetry needs the exit centred on its wall")
        centers[:, 1] = 2.0 * y - centers[:, 1]
    else:
        if not math.isclose(x, 0.5 * width):
            raise ValueError("mirror symmetry needs the exit centred on its wall")
        centers[:, 0] = 2.0 * x - centers[:, 0]
    return centers.reshape(-1)
