"""
File outputs: trajectory CSV rows streamed as nodes are produced, JSON documents.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

REAL_FORMAT = ".17g"


def format_real(value: float) -> str:
    return format(float(value), REAL_FORMAT)


def jsonable(value: Any) -> Any:
    """Replace non-finite floats by None and numpy scalars/arrays by Python values."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path: Path, document: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(jsonable(document), f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


class TrajectoryWriter:
    """Writes `t,q0,...,q{d-1}` rows; usable directly as a solve() on_step callback."""

    def __init__(self, path: Path, dimension: int):
        self.path = Path(path)
        self.dimension = dimension
        self.rows = 0
        self._file = None
        self._writer = None

    def __enter__(self) -> "TrajectoryWriter":
        self._file = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(["t", *(f"q{i}" for i in range(self.dimension))])
        return self

    def __exit__(self, *exc) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def __call__(self, k: int, t: float, q: np.ndarray) -> None:
        self._writer.writerow([format_real(t), *(format_real(x) for x in q)])
        self.rows += 1


def write_convergence_csv(path: Path, h_values: Sequence[float], errors: Sequence[float],
                          included: Sequence[bool]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["h", "e_h", "included_in_fit"])
        for h, e, inc in zip(h_values, errors, included):
            writer.writerow([format_real(h), format_real(e), "true" if inc else "false"])


def trajectory_filename(n: int, multiple: bool, suffix: str = "csv", stem: Optional[str] = None) -> str:
    stem = stem or "trajectory"
    return f"{stem}_n{n}.{suffix}" if multiple else f"{stem}.{suffix}"
