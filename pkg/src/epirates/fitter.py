"""Constrained grid-search estimation of recovery and death kernels.

A candidate gamma kernel predicts the new-recovery (or new-death) curve by
convolving the kernel against the smoothed incidence estimate; candidates
are scored by sum of squared errors on the observed series' own time
stamps and searched exhaustively over a shape/scale mesh restricted to a
mode window.  Observation grids never need to match the incidence grid.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import gammadist
from .errors import DataValidationError, EmptyFeasibleRegionError
from .gammadist import GammaParams
from .smoother import KernelSmoother, evaluate_grid
from .timeseries import TimeSeries

_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class FitConfig:
    """Search region, constraints and quadrature settings for one fit."""

    survival_probability: float
    shape_max: float
    scale_max: float
    mode_lower: float
    mode_upper: float
    shape_step: float = 0.05
    scale_step: float = 0.05
    quadrature_step: float = 0.25
    target: str = "recovery"

    def __post_init__(self):
        if not 0.0 <= self.survival_probability <= 1.0:
            raise DataValidationError("survival_probability must lie in [0, 1]")
        if self.target not in ("recovery", "death"):
            raise DataValidationError(f"unknown fit target {self.target!r}")
        if not self.mode_lower < self.mode_upper:
            raise DataValidationError("mode_lower must be below mode_upper")
        if self.mode_lower < 0:
            raise DataValidationError("mode_lower must be non-negative")
        for name in ("shape_step", "scale_step", "quadrature_step",
                     "shape_max", "scale_max"):
            if getattr(self, name) <= 0:
                raise DataValidationError(f"{name} must be positive")

    @property
    def weight(self) -> float:
        """Multiplier on the kernel: p0 for recovery, 1-p0 for death."""
        if self.target == "recovery":
            return self.survival_probability
        return 1.0 - self.survival_probability


@dataclass(frozen=True)
class FitResult:
    """Optimal kernel, its score and the curves it implies."""

    optimal: GammaParams
    sse: float
    predicted: TimeSeries
    cumulative_predicted: TimeSeries
    summary: dict
    surface_minima: list
    target: str
    survival_probability: float


def _quadrature_nodes(t: float, dt: float) -> np.ndarray:
    """Nodes 0, dt, 2 dt, ..., t; the final partial step is kept."""
    n_full = int(math.floor(t / dt + _ALIGN_TOL))
    nodes = np.arange(n_full + 1) * dt
    if t - nodes[-1] > _ALIGN_TOL * max(1.0, t):
        nodes = np.append(nodes, t)
    return nodes


def _predicted_at(smoother: KernelSmoother, p: GammaParams, weight: float,
                  t: float, dt: float) -> float:
    if t < 0:
        raise DataValidationError("prediction time must be non-negative")
    if dt <= 0:
        raise DataValidationError("quadrature step must be positive")
    nodes = _quadrature_nodes(t, dt)
    if len(nodes) < 2:
        return 0.0
    lags = np.maximum(t - nodes, 0.0)  # clamp fp noise at the t node
    integrand = gammadist.pdf(p, lags) * evaluate_grid(smoother, nodes)
    return float(weight * np.trapezoid(integrand, nodes))


def predicted_new_recoveries(smoother: KernelSmoother, p: GammaParams,
                             p0: float, t: float, dt: float) -> float:
    """Expected new recoveries at time t: p0 * (kernel (*) smoothed incidence)(t)."""
    return _predicted_at(smoother, p, p0, t, dt)


def predicted_new_deaths(smoother: KernelSmoother, p: GammaParams,
                         p0: float, t: float, dt: float) -> float:
    """Expected new deaths at time t, weighted by 1 - p0."""
    return _predicted_at(smoother, p, 1.0 - p0, t, dt)


def sse(predicted, observed: TimeSeries) -> float:
    """Sum of squared differences between a prediction and a series."""
    predicted = np.asarray(predicted, dtype=float)
    if len(predicted) != len(observed):
        raise DataValidationError(
            f"length mismatch: {len(predicted)} predictions vs "
            f"{len(observed)} observations"
        )
    d = predicted - observed.values
    return float(np.dot(d, d))


def mesh_cells(cfg: FitConfig) -> np.ndarray:
    """Feasible (shape, scale) cells, shape-major, both ascending.

    Cells sit at integer multiples of the steps, exclude shape <= 1 and
    enforce mode_lower <= (shape-1)*scale <= mode_upper.
    """
    a_vals = np.round(cfg.shape_step * np.arange(
        1, int(math.floor(cfg.shape_max / cfg.shape_step + _ALIGN_TOL)) + 1), 10)
    b_vals = np.round(cfg.scale_step * np.arange(
        1, int(math.floor(cfg.scale_max / cfg.scale_step + _ALIGN_TOL)) + 1), 10)
    aa, bb = np.meshgrid(a_vals, b_vals, indexing="ij")
    aa, bb = aa.ravel(), bb.ravel()
    modes = (aa - 1.0) * bb
    keep = (aa > 1.0 + 1e-12) \
        & (modes >= cfg.mode_lower - 1e-9) \
        & (modes <= cfg.mode_upper + 1e-9)
    return np.column_stack([aa[keep], bb[keep]])


def _fit_grid(observed: TimeSeries, dt: float) -> np.ndarray:
    """Shared quadrature grid 0 .. max(observed time) at step dt."""
    t_max = float(observed.times[-1])
    return np.arange(int(math.floor(t_max / dt + _ALIGN_TOL)) + 1) * dt


def _aligned_indices(times: np.ndarray, dt: float):
    """Map observation times onto grid indices, or None if any miss."""
    ratio = times / dt
    idx = np.rint(ratio).astype(int)
    if np.any(np.abs(ratio - idx) > _ALIGN_TOL * np.maximum(1.0, np.abs(ratio))):
        return None
    return idx


def _log_pdf_grid(a: float, b: float, grid: np.ndarray, log_grid: np.ndarray):
    """Gamma pdf on the grid; node 0 is exact (shape > 1 on every mesh cell)."""
    out = np.empty_like(grid)
    out[0] = 0.0
    out[1:] = np.exp((a - 1.0) * log_grid - grid[1:] / b
                     - gammaln(a) - a * math.log(b))
    return out


def _score_cells_aligned(cells, grid, jhat, dt, weight, obs_idx, obs_values):
    """(cell, sse) scoring via discrete convolution on the shared grid.

    For grid-aligned observation times the trapezoid convolution reduces
    to a discrete convolution with half-weight end corrections; each cell
    is scored independently, so results do not depend on chunking.
    """
    log_grid = np.log(grid[1:])
    out = np.empty(len(cells))
    for i, (a, b) in enumerate(cells):
        pdf_vals = _log_pdf_grid(a, b, grid, log_grid)
        conv = np.convolve(pdf_vals, jhat)[obs_idx]
        pred = weight * dt * (conv - 0.5 * pdf_vals[obs_idx] * jhat[0])
        d = pred - obs_values
        out[i] = np.dot(d, d)
    return out


def _general_weights(times, grid, dt):
    """Per-observation trapezoid weights over the shared grid.

    Row j covers nodes 0..k_j plus the partial segment up to t_j; the
    integrand at t_j itself vanishes (shape > 1), so the partial segment
    folds into node k_j's weight.
    """
    m, K = len(times), len(grid)
    weights = np.zeros((m, K))
    u = times[:, None] - grid[None, :]
    for jrow, t in enumerate(times):
        k_last = int(math.floor(t / dt + _ALIGN_TOL))
        k_last = min(k_last, K - 1)
        if k_last >= 1:
            weights[jrow, : k_last + 1] = dt
            weights[jrow, 0] = 0.5 * dt
            weights[jrow, k_last] = 0.5 * dt
        delta = t - grid[k_last]
        if delta > _ALIGN_TOL * max(1.0, t):
            weights[jrow, k_last] += 0.5 * delta
        weights[jrow, k_last + 1:] = 0.0
    # The integrand vanishes wherever u = 0 (pdf(0) = 0 for shape > 1), so
    # those nodes drop out; remaining masked nodes get a placeholder u.
    weights[u <= 0] = 0.0
    u = np.where(weights > 0, u, 1.0)
    return u, weights


def _score_cells_general(cells, u, wj, weight, obs_values):
    """Scoring for arbitrary observation times (pdf evaluated per cell)."""
    log_u = np.log(u)
    out = np.empty(len(cells))
    for i, (a, b) in enumerate(cells):
        logpdf = (a - 1.0) * log_u - u / b - gammaln(a) - a * math.log(b)
        pred = weight * (np.exp(logpdf) * wj).sum(axis=1)
        d = pred - obs_values
        out[i] = np.dot(d, d)
    return out


def _score_chunk(args):
    mode, cells, payload = args
    if mode == "aligned":
        grid, jhat, dt, weight, obs_idx, obs_values = payload
        return _score_cells_aligned(cells, grid, jhat, dt, weight,
                                    obs_idx, obs_values)
    u, wj, weight, obs_values = payload
    return _score_cells_general(cells, u, wj, weight, obs_values)


def _predict_aligned(a, b, grid, jhat, dt, weight, obs_idx):
    pdf_vals = _log_pdf_grid(a, b, grid, np.log(grid[1:]))
    conv = np.convolve(pdf_vals, jhat)[obs_idx]
    return weight * dt * (conv - 0.5 * pdf_vals[obs_idx] * jhat[0])


def _predict_general(a, b, u, wj, weight):
    logpdf = (a - 1.0) * np.log(u) - u / b - gammaln(a) - a * math.log(b)
    return weight * (np.exp(logpdf) * wj).sum(axis=1)


def evaluate_cell(smoother: KernelSmoother, observed: TimeSeries,
                  cfg: FitConfig, p: GammaParams) -> float:
    """SSE of a single candidate kernel, using the fit's own quadrature."""
    if p.shape <= 1:
        raise DataValidationError("candidate kernels need shape > 1")
    dt = cfg.quadrature_step
    grid = _fit_grid(observed, dt)
    jhat = evaluate_grid(smoother, grid)
    obs_idx = _aligned_indices(observed.times, dt)
    cells = np.array([[p.shape, p.scale]])
    if obs_idx is not None:
        scores = _score_cells_aligned(cells, grid, jhat, dt, cfg.weight,
                                      obs_idx, observed.values)
    else:
        u, w = _general_weights(observed.times, grid, dt)
        scores = _score_cells_general(cells, u, w * jhat[None, :],
                                      cfg.weight, observed.values)
    return float(scores[0])


def fit(smoother: KernelSmoother, observed: TimeSeries, cfg: FitConfig,
        workers: int | None = None) -> FitResult:
    """Exhaustive mesh search for the SSE-minimizing kernel.

    Every feasible cell is scored; ties break toward the smallest shape,
    then the smallest scale (cells are enumerated shape-major).  The
    reduction is ordered by cell index, so the result is identical for
    any worker count.
    """
    if len(observed) == 0:
        raise DataValidationError("observed series is empty")
    cells = mesh_cells(cfg)
    if len(cells) == 0:
        raise EmptyFeasibleRegionError(
            "no mesh cell satisfies the mode window "
            f"[{cfg.mode_lower}, {cfg.mode_upper}]"
        )

    dt = cfg.quadrature_step
    grid = _fit_grid(observed, dt)
    jhat = evaluate_grid(smoother, grid)
    obs_idx = _aligned_indices(observed.times, dt)
    if obs_idx is not None:
        mode = "aligned"
        payload = (grid, jhat, dt, cfg.weight, obs_idx, observed.values)
    else:
        mode = "general"
        u, w = _general_weights(observed.times, grid, dt)
        payload = (u, w * jhat[None, :], cfg.weight, observed.values)

    if workers is None:
        workers = (os.cpu_count() or 1) if len(cells) >= 2000 else 1
    workers = max(1, min(int(workers), len(cells)))

    if workers == 1:
        scores = _score_chunk((mode, cells, payload))
    else:
        chunks = np.array_split(cells, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_score_chunk,
                                  [(mode, chunk, payload) for chunk in chunks]))
        scores = np.concatenate(parts)

    best = int(np.argmin(scores))  # first minimum wins: smallest shape, then scale
    a_star, b_star = float(cells[best, 0]), float(cells[best, 1])
    optimal = GammaParams(shape=a_star, scale=b_star)

    if obs_idx is not None:
        pred = _predict_aligned(a_star, b_star, grid, jhat, dt, cfg.weight, obs_idx)
    else:
        pred = _predict_general(a_star, b_star, u, w * jhat[None, :], cfg.weight)

    label = "new_recoveries" if cfg.target == "recovery" else "new_deaths"
    cumulative_label = ("cumulative_recoveries" if cfg.target == "recovery"
                        else "cumulative_deaths")
    predicted_ts = TimeSeries(times=observed.times.copy(), values=pred,
                              label=label, time_unit=observed.time_unit)
    spacing = np.diff(observed.times, prepend=0.0)
    cumulative_ts = TimeSeries(
        times=observed.times.copy(), values=np.cumsum(pred * spacing),
        label=cumulative_label, time_unit=observed.time_unit,
    )

    order = np.argsort(scores, kind="stable")[:5]
    surface_minima = [
        {"shape": float(cells[i, 0]), "scale": float(cells[i, 1]),
         "sse": float(scores[i])}
        for i in order
    ]
    return FitResult(
        optimal=optimal,
        sse=float(scores[best]),
        predicted=predicted_ts,
        cumulative_predicted=cumulative_ts,
        summary=gammadist.summary(optimal),
        surface_minima=surface_minima,
        target=cfg.target,
        survival_probability=cfg.survival_probability,
    )


def fit_report(result: FitResult, observed: TimeSeries,
               resolved_config: dict | None = None) -> dict:
    """JSON-ready document with the fit, its curves and the observations."""
    doc = {
        "target": result.target,
        "optimal": {"shape": result.optimal.shape, "scale": result.optimal.scale},
        "sse": result.sse,
        "survival_probability": result.survival_probability,
        "summary": result.summary,
        "surface_minima": result.surface_minima,
        "predicted": {
            "times": result.predicted.times.tolist(),
            "values": result.predicted.values.tolist(),
        },
        "cumulative_predicted": {
            "times": result.cumulative_predicted.times.tolist(),
            "values": result.cumulative_predicted.values.tolist(),
        },
        "observed": {
            "times": observed.times.tolist(),
            "values": observed.values.tolist(),
        },
    }
    if resolved_config is not None:
        doc["resolved_config"] = resolved_config
    return doc
