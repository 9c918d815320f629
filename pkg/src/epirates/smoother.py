"""Nadaraya-Watson kernel regression over incidence observations.

The smoother turns irregular (t_i, J_i) samples into a continuous
estimate of the new-infection curve, evaluable at arbitrary points; every
convolution downstream integrates against it.  Weights use the Gaussian
kernel with bandwidth n^(-1/5) (times an optional multiplier) and are
computed with the maximum exponent subtracted, so the weighted average
stays defined far from the data where raw kernel values underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataValidationError
from .timeseries import TimeSeries

# Below this raw denominator the shifted weights are unusable and the
# nearest observation wins.  With exponent shifting the denominator is
# >= 1 for any finite argument, so this only guards non-finite input.
UNDERFLOW_FLOOR = 1e-300


def default_bandwidth(n: int, multiplier: float = 1.0) -> float:
    """Bandwidth rule h = multiplier * n^(-1/5)."""
    if n < 1:
        raise DataValidationError("bandwidth requires at least one observation")
    if multiplier <= 0:
        raise DataValidationError("bandwidth multiplier must be positive")
    return multiplier * float(n) ** (-0.2)


def gaussian_kernel(x):
    """Standard Gaussian kernel (1/sqrt(2 pi)) exp(-x^2 / 2)."""
    x_arr = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x_arr * x_arr) / math.sqrt(2.0 * math.pi)
    return out if np.ndim(x) else float(out)


@dataclass(frozen=True)
class KernelSmoother:
    """Gaussian-kernel local-constant regressor over one series."""

    points: TimeSeries
    bandwidth: float
    bandwidth_multiplier: float = 1.0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise DataValidationError("bandwidth must be positive")
        if self.bandwidth_multiplier <= 0:
            raise DataValidationError("bandwidth multiplier must be positive")

    @classmethod
    def from_series(cls, points: TimeSeries, bandwidth_multiplier: float = 1.0):
        """Build a smoother with the default n^(-1/5) bandwidth rule."""
        h = default_bandwidth(len(points), bandwidth_multiplier)
        return cls(points=points, bandwidth=h,
                   bandwidth_multiplier=bandwidth_multiplier)


def evaluate(s: KernelSmoother, xi: float) -> float:
    """Kernel-weighted average of the observed values at one point."""
    if not math.isfinite(xi):
        raise DataValidationError("evaluation point must be finite")
    t = s.points.times
    j = s.points.values
    z = -0.5 * ((xi - t) / s.bandwidth) ** 2
    m = z.max()
    if not np.isfinite(m):
        return float(j[np.argmin(np.abs(xi - t))])
    w = np.exp(z - m)
    denom = w.sum()
    if denom < UNDERFLOW_FLOOR:
        return float(j[np.argmin(np.abs(xi - t))])
    return float(np.dot(w, j) / denom)


def evaluate_grid(s: KernelSmoother, grid) -> np.ndarray:
    """Vectorized evaluate over a sorted grid of points."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        return np.empty(0)
    t = s.points.times
    j = s.points.values
    z = -0.5 * ((grid[:, None] - t[None, :]) / s.bandwidth) ** 2
    m = z.max(axis=1, keepdims=True)
    bad = ~np.isfinite(m[:, 0])
    m[bad] = 0.0
    w = np.exp(z - m)
    denom = w.sum(axis=1)
    out = (w @ j) / denom
    if np.any(bad):
        nearest = np.argmin(np.abs(grid[bad, None] - t[None, :]), axis=1)
        out[bad] = j[nearest]
    return out
