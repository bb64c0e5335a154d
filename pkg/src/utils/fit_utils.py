"""
Log-log least-squares fits of value ~ N^slope.
"""

import math
from dataclasses import dataclass

import numpy as np

from config import EXPERIMENT_CONFIG
from errors import ConstraintViolation


@dataclass(frozen=True)
class ScalingFit:
    Ns: tuple[int, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    max_residual: float


def _loglog(Ns, values) -> tuple[np.ndarray, np.ndarray]:
    Ns = np.asarray(Ns, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0) or np.any(Ns <= 0):
        raise ConstraintViolation("log-log fits need positive N and values")
    return np.log(Ns), np.log(values)


def fit_exponent(points) -> ScalingFit:
    """Ordinary least squares on (log N, log value)."""
    points = sorted((int(n), float(v)) for n, v in points)
    if len(points) < EXPERIMENT_CONFIG["min_fit_points"]:
        raise ConstraintViolation(
            f"need at least {EXPERIMENT_CONFIG['min_fit_points']} points, got {len(points)}"
        )
    Ns, values = zip(*points)
    x, y = _loglog(Ns, values)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    return ScalingFit(
        Ns=tuple(Ns),
        values=tuple(values),
        slope=float(slope),
        intercept=float(intercept),
        max_residual=float(np.abs(residual).max()),
    )


def running_slopes(Ns, values) -> list[float]:
    """Slope over the first k points for each k; NaN while fewer than two."""
    x, y = _loglog(Ns, values)
    slopes = [math.nan]
    for k in range(2, len(x) + 1):
        slopes.append(float(np.polyfit(x[:k], y[:k], 1)[0]))
    return slopes[: len(x)]
