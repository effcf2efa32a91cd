"""
Convergence studies: e_h = max_i |q_{h_min}(t_i) - q_h(t_i)| against a
reference run, and the least-squares slope of log e_h versus log h.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from sweepcore.common.exceptions import ConfigError
from sweepcore.common.logging import setup_logging
from sweepcore.config import get_config
from sweepcore.core.model import SweepingProblem
from sweepcore.stepper import DiscreteTrajectory, error_samples, solve, sup_error

logger = setup_logging("convergence")

EXACT = "exact"
MIN_FIT_POINTS = 3


@dataclass
class ConvergenceReport:
    h_values: List[float]
    errors: List[float]
    included: List[bool]
    slope: Union[float, str, None]
    intercept: Optional[float]
    excluded: List[dict] = field(default_factory=list)
    h_min: Optional[float] = None

    @property
    def included_count(self) -> int:
        return sum(self.included)

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "points": [
                {"h": h, "e_h": e, "included_in_fit": inc}
                for h, e, inc in zip(self.h_values, self.errors, self.included)
            ],
            "excluded": self.excluded,
            "h_min": self.h_min,
        }


def fit_slope(
    h_values: Sequence[float],
    errors: Sequence[float],
    h_min: float,
    exclusion_factor: Optional[float] = None,
    exact_tol: Optional[float] = None,
) -> ConvergenceReport:
    """Fit log e_h = slope * log h + intercept over the admissible points.

    Points with h < exclusion_factor * h_min or e_h <= exact_tol are left out.
    The slope is the "exact" sentinel when every e_h is within exact_tol and
    None when fewer than three points remain.
    """
    if len(h_values) != len(errors):
        raise ValueError("h and e_h lists differ in length")
    if any(e < 0 for e in errors):
        raise ValueError("errors must be nonnegative")
    cfg = get_config().convergence
    factor = cfg.exclusion_factor if exclusion_factor is None else exclusion_factor
    exact_tol = cfg.exact_tol if exact_tol is None else exact_tol

    included, excluded = [], []
    for h, e in zip(h_values, errors):
        if h < factor * h_min:
            excluded.append({"h": h, "reason": f"h < {factor:g} h_min"})
            included.append(False)
        elif e <= exact_tol:
            excluded.append({"h": h, "reason": "exact (e_h = 0)"})
            included.append(False)
        else:
            included.append(True)

    slope: Union[float, str, None] = None
    intercept: Optional[float] = None
    if errors and all(e <= exact_tol for e in errors):
        slope = EXACT
    elif sum(included) >= MIN_FIT_POINTS:
        x = np.log([h for h, inc in zip(h_values, included) if inc])
        y = np.log([e for e, inc in zip(errors, included) if inc])
        slope_value, intercept_value = np.polyfit(x, y, 1)
        slope, intercept = float(slope_value), float(intercept_value)

    return ConvergenceReport(
        h_values=[float(h) for h in h_values],
        errors=[float(e) for e in errors],
        included=included,
        slope=slope,
        intercept=intercept,
        excluded=excluded,
        h_min=float(h_min),
    )


def step_count(horizon: float, h: float) -> int:
    """n = T / h, rounded with a warning when not integral."""
    ratio = horizon / h
    n = max(1, int(round(ratio)))
    if not math.isclose(ratio, n, rel_tol=1e-9, abs_tol=1e-9):
        logger.warning(f"T/h = {ratio:.6g} is not integral; using n = {n} (h = {horizon / n:.6g})",
                       extra={"h": h, "n": n})
    return n


def run_convergence(
    problem: SweepingProblem,
    h_values: Sequence[float],
    h_min: float,
    threads: int = 1,
    prune: Optional[Callable[[float], Optional[float]]] = None,
    samples: Optional[int] = None,
    exclusion_factor: Optional[float] = None,
    progress: bool = True,
) -> ConvergenceReport:
    """Run the reference at h_min, then every h of the study in a thread pool.

    Args:
        problem: Sweeping problem
        h_values: Step sizes of the study; each must be >= h_min
        h_min: Reference step size
        threads: Worker threads for the per-h runs
        prune: Optional map h -> prune radius passed to solve()
        samples: Number of error sample times (config default when None)

    Raises:
        ConfigError: a step size below h_min
        StepFailure: from any run
    """
    if h_min <= 0:
        raise ConfigError(f"h_min must be positive, got {h_min}")
    too_small = [h for h in h_values if h < h_min]
    if too_small:
        raise ConfigError(f"step sizes {too_small} are below h_min = {h_min}")

    horizon = problem.horizon
    n_ref = step_count(horizon, h_min)

    def run(n: int) -> DiscreteTrajectory:
        return solve(problem, n, prune_radius=None if prune is None else prune(horizon / n))

    logger.info(f"Reference run n={n_ref}", extra={"n": n_ref, "h": h_min})
    reference = run(n_ref)

    counts = [step_count(horizon, h) for h in h_values]
    pending = sorted({n for n in counts if n != n_ref})
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = dict(zip(pending, tqdm(pool.map(run, pending), total=len(pending), desc="convergence",
                                          unit="run", disable=not progress)))
    results[n_ref] = reference

    times = error_samples(horizon, samples)
    errors = [sup_error(reference, results[n], times) for n in counts]
    report = fit_slope(list(h_values), errors, h_min, exclusion_factor)
    logger.info(f"Convergence slope {report.slope} over {report.included_count} points")
    return report
