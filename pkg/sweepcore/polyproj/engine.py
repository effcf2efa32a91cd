#!/usr/bin/env python3
"""
Sweepcore - Polyhedral Projection Engine
Inner convex approximation Qc(t, q) and Euclidean projection onto it.

Qc(t, q) = { x : g_i(t, q) + <grad g_i(t, q), x - q> >= 0 for all i }

Projection solves  min 1/2 |x - y|^2  s.t.  N x >= b  through its dual

    min_{lam >= 0}  1/2 lam^T G lam - s^T lam,   G = N N^T,  s = b - N y,

with x = y + N^T lam. The dual is solved by projected gradient ascent
(Uzawa), optionally accelerated with adaptive restart, and every few
iterations the support of lam is polished into an exact KKT point.
"""

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import nnls

from sweepcore.common.exceptions import DimensionMismatch, EvaluationError, Infeasible, MaxIterations, ZeroGradient
from sweepcore.common.logging import setup_logging
from sweepcore.config import get_config
from sweepcore.core.model import SweepingProblem

logger = setup_logging("polyproj")


@dataclass(frozen=True)
class HalfSpace:
    """{x : <normal, x> >= offset}"""
    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.array(self.normal, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(normal)) or not np.isfinite(self.offset):
            raise ValueError("half-space data must be finite")
        if np.linalg.norm(normal) <= 0.0:
            raise ValueError("half-space normal must be nonzero")
        normal.flags.writeable = False
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    def slack(self, y: np.ndarray) -> float:
        return float(self.normal @ y - self.offset)


@dataclass(frozen=True)
class Polyhedron:
    """Intersection of half-spaces, stored row-wise as N x >= b.

    `indices` maps each row back to the constraint it linearizes and
    `values` keeps g_i(t, q) at the linearization point when known.
    """
    normals: np.ndarray
    offsets: np.ndarray
    dimension: int
    indices: Tuple[int, ...] = ()
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        normals = np.array(self.normals, dtype=np.float64).reshape(-1, self.dimension)
        offsets = np.array(self.offsets, dtype=np.float64).reshape(-1)
        if normals.shape[0] != offsets.size:
            raise DimensionMismatch(f"{normals.shape[0]} normals but {offsets.size} offsets")
        normals.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        if not self.indices:
            object.__setattr__(self, "indices", tuple(range(offsets.size)))

    @classmethod
    def from_halfspaces(cls, halfspaces: Iterable[HalfSpace], dimension: int) -> "Polyhedron":
        halfspaces = list(halfspaces)
        for hs in halfspaces:
            if hs.normal.size != dimension:
                raise DimensionMismatch(f"normal of size {hs.normal.size} in dimension {dimension}")
        normals = np.array([hs.normal for hs in halfspaces]).reshape(len(halfspaces), dimension)
        offsets = np.array([hs.offset for hs in halfspaces])
        return cls(normals, offsets, dimension)

    @property
    def size(self) -> int:
        return int(self.offsets.size)

    @property
    def halfspaces(self) -> Tuple[HalfSpace, ...]:
        return tuple(HalfSpace(n, b) for n, b in zip(self.normals, self.offsets))

    def slacks(self, x: np.ndarray) -> np.ndarray:
        """<n_i, x> - b_i for every row; negative entries are violations."""
        return self.normals @ x - self.offsets

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return bool(self.size == 0 or self.slacks(x).min() >= -tol)


@dataclass(frozen=True)
class ProjectionResult:
    """Projected point with its multipliers: point = y + sum_i lam_i n_i."""
    point: np.ndarray
    multipliers: np.ndarray
    residual: float
    iterations: int
    polished: bool = field(default=False, compare=False)


def linearize(
    problem: SweepingProblem,
    t: float,
    q: np.ndarray,
    indices: Optional[Sequence[int]] = None,
    grad_floor: Optional[float] = None,
) -> Polyhedron:
    """Build Qc(t, q) from the constraints (or the given subset of them).

    Raises:
        ZeroGradient: if |grad g_i(t, q)| < grad_floor
        EvaluationError: if some g_i(t, q) is not finite
    """
    grad_floor = get_config().tolerance.grad_floor if grad_floor is None else grad_floor
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (problem.dimension,):
        raise DimensionMismatch(f"expected dimension {problem.dimension}, got shape {q.shape}")
    rows = range(problem.size) if indices is None else [int(i) for i in indices]
    rows = list(rows)

    normals = np.empty((len(rows), problem.dimension))
    values = np.empty(len(rows))
    for r, i in enumerate(rows):
        constraint = problem.constraints[i]
        values[r] = constraint(t, q)
        if not np.isfinite(values[r]):
            raise EvaluationError(i, values[r])
        gradient = np.asarray(constraint.gradient(t, q), dtype=np.float64)
        norm = float(np.linalg.norm(gradient))
        if not norm >= grad_floor:
            raise ZeroGradient(i, norm)
        normals[r] = gradient
    offsets = normals @ q - values
    return Polyhedron(normals, offsets, problem.dimension, indices=tuple(rows), values=values)


def distance_single(y: np.ndarray, hs: HalfSpace) -> float:
    """Distance from y to one half-space: max(0, offset - <n, y>) / |n|."""
    return max(0.0, hs.offset - float(hs.normal @ np.asarray(y, dtype=np.float64))) / float(
        np.linalg.norm(hs.normal)
    )


def row_distances(y: np.ndarray, poly: Polyhedron) -> np.ndarray:
    """distance_single to every row of the polyhedron at once."""
    y = np.asarray(y, dtype=np.float64)
    if poly.size == 0:
        return np.zeros(0)
    return np.maximum(0.0, -poly.slacks(y)) / np.linalg.norm(poly.normals, axis=1)


def _kkt_residual(poly: Polyhedron, x: np.ndarray, lam: np.ndarray) -> Tuple[float, float]:
    """(primal violation, complementarity max |lam_i * slack_i|)."""
    slack = poly.slacks(x)
    primal = max(0.0, -float(slack.min()))
    comp = float(np.max(lam * np.abs(slack))) if lam.size else 0.0
    return primal, comp


def _power_iteration(normals: np.ndarray, iterations: int) -> float:
    """Estimate the largest eigenvalue of G = N N^T without forming G."""
    v = np.ones(normals.shape[0]) / np.sqrt(normals.shape[0])
    estimate = 0.0
    for _ in range(iterations):
        w = normals @ (normals.T @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            break
        estimate = norm
        v = w / norm
    if estimate == 0.0:
        estimate = float(np.max(np.sum(normals * normals, axis=1)))
    return estimate


def _polish(
    y: np.ndarray, poly: Polyhedron, support: np.ndarray, rounds: int = 3
) -> Optional[Tuple[np.ndarray, np.ndarray, float, float]]:
    """Solve the KKT system on the affine set of a support.

    Dependent rows are fine: lstsq returns the minimum-norm step and nnls
    picks one of the multiplier vectors. Rows violated by the candidate are
    added to the support for up to `rounds` solves. Returns the candidate
    (x, lam, primal, comp) with the smallest residual, where primal also
    covers stationarity, or None when the support is empty.
    """
    support = support.copy()
    best = None
    for _ in range(rounds):
        idx = np.flatnonzero(support)
        if idx.size == 0:
            break
        rows = poly.normals[idx]
        target = poly.offsets[idx] - rows @ y
        delta, *_ = np.linalg.lstsq(rows, target, rcond=None)
        # one refinement pass
        correction, *_ = np.linalg.lstsq(rows, target - rows @ delta, rcond=None)
        delta = delta + correction
        x = y + delta
        try:
            mu, rnorm = nnls(rows.T, delta)
        except RuntimeError:
            break
        lam = np.zeros(poly.size)
        lam[idx] = mu
        primal, comp = _kkt_residual(poly, x, lam)
        primal = max(primal, float(rnorm))
        if best is None or max(primal, comp) < max(best[2], best[3]):
            best = (x, lam, primal, comp)
        grown = support | (poly.slacks(x) < 0.0)
        if np.array_equal(grown, support):
            break
        support = grown
    return best


def _relaxed_tolerance(proj_tol: float, feas_tol: float, y: np.ndarray, lam: np.ndarray) -> float:
    """Residual accepted once the iteration stalls.

    proj_tol scaled by max(1, |y|, |lam|), never below the rounding floor of
    that scale and never above feas_tol.
    """
    scale = max(1.0, float(np.linalg.norm(y)), float(np.linalg.norm(lam)))
    return min(max(proj_tol, 1e3 * np.finfo(np.float64).eps) * scale, feas_tol)


def _farkas_certificate(poly: Polyhedron, lam: np.ndarray, tol: float) -> Optional[np.ndarray]:
    """Normalized lam with N^T lam ~ 0 and b^T lam > 0 proves {N x >= b} empty."""
    norm = float(np.linalg.norm(lam))
    if norm == 0.0:
        return None
    direction = lam / norm
    scale = float(np.max(np.linalg.norm(poly.normals, axis=1)))
    if np.linalg.norm(poly.normals.T @ direction) <= tol * scale and poly.offsets @ direction > tol:
        return direction
    return None


def project(
    y: np.ndarray,
    poly: Polyhedron,
    warm_start: Optional[np.ndarray] = None,
    proj_tol: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> ProjectionResult:
    """Euclidean projection of y onto the polyhedron.

    The iteration stops at KKT residual proj_tol. When the residual stops
    improving (no halving over `stall_checks` polish rounds) the best point
    is accepted if its residual is within the relaxed tolerance; jammed
    supports with dependent rows stall at rounding level this way.

    Args:
        y: Point to project
        poly: Target polyhedron, assumed nonempty (emptiness is detected)
        warm_start: Initial multipliers, zero-padded or truncated to the row count
        proj_tol: KKT residual target
        max_iterations: Dual iteration cap

    Raises:
        Infeasible: dual multipliers blow up or a Farkas certificate is found
        MaxIterations: residual target not reached; carries the best iterate
    """
    cfg = get_config()
    proj_tol = cfg.tolerance.proj_tol if proj_tol is None else proj_tol
    feas_tol = cfg.tolerance.feas_tol
    settings = cfg.projection
    max_iterations = settings.max_iterations if max_iterations is None else max_iterations

    y = np.asarray(y, dtype=np.float64)
    if y.shape != (poly.dimension,):
        raise DimensionMismatch(f"expected dimension {poly.dimension}, got shape {y.shape}")
    p = poly.size
    if p == 0:
        return ProjectionResult(y.copy(), np.zeros(0), 0.0, 0)

    normals, offsets = poly.normals, poly.offsets
    s = offsets - normals @ y
    if s.max() <= proj_tol:
        return ProjectionResult(y.copy(), np.zeros(p), max(0.0, float(s.max())), 0)

    lam = np.zeros(p)
    if warm_start is not None and settings.warm_start:
        ws = np.asarray(warm_start, dtype=np.float64)[:p]
        lam[: ws.size] = np.maximum(ws, 0.0)
    nt_lam = normals.T @ lam

    comp_tol = max(cfg.tolerance.comp_tol, proj_tol)

    def converged(primal: float, comp: float) -> bool:
        return primal <= proj_tol and comp <= comp_tol

    best_res, best_x, best_lam, best_polished = np.inf, y + nt_lam, lam.copy(), False
    if lam.any():
        polished = _polish(y, poly, lam > 0)
        if polished is not None:
            x, lam_p, primal, comp = polished
            if converged(primal, comp):
                return ProjectionResult(x, lam_p, max(primal, comp), 0, polished=True)
            best_res, best_x, best_lam, best_polished = max(primal, comp), x, lam_p, True

    lipschitz = 1.05 * _power_iteration(normals, settings.power_iterations)
    min_norm = float(np.min(np.linalg.norm(normals, axis=1)))
    blowup = settings.blowup_factor * (1.0 + float(np.linalg.norm(y))) / min_norm

    z, nt_z = lam.copy(), nt_lam.copy()
    momentum = 1.0
    checkpoint_res, stalled = best_res, 0
    for it in range(1, max_iterations + 1):
        grad = normals @ nt_z - s
        while True:
            lam_new = np.maximum(0.0, z - grad / lipschitz)
            nt_new = normals.T @ lam_new
            step = lam_new - z
            # quadratic upper model; doubles L when the power estimate was low
            if np.dot(nt_new - nt_z, nt_new - nt_z) <= lipschitz * np.dot(step, step) * (1 + 1e-12) + 1e-300:
                break
            lipschitz *= 2.0

        if settings.accelerate:
            if np.dot(z - lam_new, lam_new - lam) > 0:
                momentum = 1.0
                z, nt_z = lam_new, nt_new
            else:
                nxt = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * momentum * momentum))
                beta = (momentum - 1.0) / nxt
                z = lam_new + beta * (lam_new - lam)
                nt_z = nt_new + beta * (nt_new - nt_lam)
                momentum = nxt
        else:
            z, nt_z = lam_new, nt_new
        lam, nt_lam = lam_new, nt_new

        x = y + nt_lam
        primal, comp = _kkt_residual(poly, x, lam)
        if converged(primal, comp):
            return ProjectionResult(x, lam, max(primal, comp), it)
        if max(primal, comp) < best_res:
            best_res, best_x, best_lam, best_polished = max(primal, comp), x, lam, False

        if it == 1 or it % settings.polish_every == 0:
            support = lam > 0
            for candidate in (support, support | (poly.slacks(x) < proj_tol)):
                polished = _polish(y, poly, candidate)
                if polished is None:
                    continue
                x_p, lam_p, primal, comp = polished
                if converged(primal, comp):
                    return ProjectionResult(x_p, lam_p, max(primal, comp), it, polished=True)
                if max(primal, comp) < best_res:
                    best_res, best_x, best_lam, best_polished = max(primal, comp), x_p, lam_p, True

            if best_res < 0.5 * checkpoint_res:
                checkpoint_res, stalled = best_res, 0
            else:
                stalled += 1
            if stalled >= settings.stall_checks and best_res <= _relaxed_tolerance(proj_tol, feas_tol, y, best_lam):
                logger.debug(f"Projection stalled at residual {best_res:.3e}, accepting best point",
                             extra={"iterations": it, "residual": best_res})
                return ProjectionResult(best_x, best_lam, best_res, it, polished=best_polished)

            lam_norm = float(np.linalg.norm(lam))
            if lam_norm > 1e3 * (1.0 + float(np.linalg.norm(y))) / min_norm:
                certificate = _farkas_certificate(poly, lam, 1e-8)
                if certificate is not None:
                    raise Infeasible("Farkas certificate found: linearized set is empty", certificate)
            if lam_norm > blowup:
                raise Infeasible(f"dual multipliers diverged (|lam| = {lam_norm:.3e})", lam / lam_norm)

    if best_res <= _relaxed_tolerance(proj_tol, feas_tol, y, best_lam):
        return ProjectionResult(best_x, best_lam, best_res, max_iterations, polished=best_polished)
    logger.warning(f"Projection hit {max_iterations} iterations, residual {best_res:.3e}",
                   extra={"iterations": max_iterations, "residual": best_res})
    raise MaxIterations(best_x, best_res, max_iterations)


def distance(y: np.ndarray, poly: Polyhedron, warm_start: Optional[np.ndarray] = None) -> float:
    """Distance from y to the polyhedron (0 when y lies inside)."""
    y = np.asarray(y, dtype=np.float64)
    result = project(y, poly, warm_start=warm_start)
    return float(np.linalg.norm(y - result.point))
