"""Problem builders shared by the test suites."""

import numpy as np

from sweepcore.core.model import Constraint, SweepingProblem
from sweepcore.crowd import disk_constraint
from sweepcore.polyproj import Polyhedron


def halfspace_constraint(normal, offset, name=""):
    """Linear constraint <normal, q> - offset >= 0."""
    normal = np.asarray(normal, dtype=np.float64)
    return Constraint(lambda t, q: float(normal @ q) - offset, lambda t, q: normal, lambda t, q: 0.0, name=name)


def random_polyhedron(rng: np.random.Generator, d: int, p: int, tight: bool = False) -> Polyhedron:
    """Nonempty polyhedron through a random interior (or boundary, when tight) point."""
    normals = rng.normal(size=(p, d))
    anchor = rng.normal(size=d)
    slack = np.zeros(p) if tight else rng.uniform(0.0, 1.0, size=p)
    return Polyhedron(normals, normals @ anchor - slack, d)


def jammed_chain(count: int = 12, radius: float = 0.3, origin: float = 37.1, drift=(1.0, 0.25), horizon: float = 1.0):
    """Disks touching in a row between two walls that leave no room along x.

    The count - 1 contacts and two walls give count + 1 rows acting on count
    x-coordinates, so every projection support is linearly dependent.
    """
    dimension = 2 * count
    initial = np.zeros(dimension)
    initial[0::2] = origin + radius * (2.0 * np.arange(count) + 1.0)
    initial[1::2] = 5.0
    left, right = np.zeros(dimension), np.zeros(dimension)
    left[0], right[2 * count - 2] = 1.0, -1.0
    constraints = [
        halfspace_constraint(left, origin + radius, name="wall[left]"),
        halfspace_constraint(right, -(origin + 2.0 * radius * count - radius), name="wall[right]"),
    ]
    constraints += [disk_constraint(i, i + 1, radius) for i in range(count - 1)]
    velocity = np.tile(np.asarray(drift, dtype=np.float64), count)
    return SweepingProblem(constraints, lambda t, q: velocity, initial, horizon, name="jammed-chain")
