"""
Brute-force projection by active-set enumeration.

For every subset A of rows, the equality-constrained problem
min |x - y|^2 s.t. <n_i, x> = b_i (i in A) is solved through a pivoted QR
factorization of N_A^T. The candidate that is primal feasible with
nonnegative multipliers is the projection. Subsets whose rows are linearly
dependent are skipped: by Caratheodory's theorem the projection always has
a multiplier vector supported on independent rows.
"""

from itertools import combinations
from typing import Optional

import numpy as np
import scipy.linalg

from sweepcore.common.exceptions import DimensionMismatch, NoKktPoint
from .engine import Polyhedron

MAX_ORACLE_ROWS = 20


def _subset_candidate(y: np.ndarray, poly: Polyhedron, rows: tuple, rank_tol: float):
    """KKT candidate for one active subset, or None when the rows are dependent."""
    block = poly.normals[list(rows)].T  # d x k
    q, r, perm = scipy.linalg.qr(block, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= rank_tol * max(1.0, diag.max()):
        return None
    rhs = (poly.offsets[list(rows)] - poly.normals[list(rows)] @ y)[perm]
    u = scipy.linalg.solve_triangular(r, rhs, trans="T", lower=False)
    w = scipy.linalg.solve_triangular(r, u, lower=False)
    mu = np.empty_like(w)
    mu[perm] = w
    x = y + block @ mu
    return x, mu


def project_oracle(y: np.ndarray, poly: Polyhedron, tol: float = 1e-9) -> np.ndarray:
    """Exact projection of y by enumerating all active subsets (p <= 20).

    Raises:
        NoKktPoint: no subset yields a feasible candidate (empty polyhedron)
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (poly.dimension,):
        raise DimensionMismatch(f"expected dimension {poly.dimension}, got shape {y.shape}")
    p = poly.size
    if p > MAX_ORACLE_ROWS:
        raise ValueError(f"oracle enumerates 2^p subsets; p = {p} exceeds {MAX_ORACLE_ROWS}")
    if p == 0 or poly.contains(y, tol):
        return y.copy()

    scale = max(1.0, float(np.linalg.norm(y)), float(np.max(np.abs(poly.offsets))))
    best: Optional[np.ndarray] = None
    best_dist = np.inf
    for k in range(1, min(p, poly.dimension) + 1):
        for rows in combinations(range(p), k):
            candidate = _subset_candidate(y, poly, rows, rank_tol=1e-12)
            if candidate is None:
                continue
            x, mu = candidate
            if mu.min() < -tol * scale:
                continue
            if not poly.contains(x, tol * scale):
                continue
            dist = float(np.linalg.norm(x - y))
            if dist < best_dist:
                best, best_dist = x, dist
    if best is None:
        raise NoKktPoint(f"no KKT point among the subsets of {p} half-spaces")
    return best
