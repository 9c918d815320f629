"""Constant-rate removal estimators driven by central tendencies.

The classical model predicts new recoveries as r0 * I(t) with r0 a
constant; here r0 is derived from a central tendency (mean, median or
mode) of a fitted gamma kernel, which is how such constants are usually
chosen in practice.  These curves are the comparison targets that the
distributed fit is scored against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gammadist
from .errors import DataValidationError, NoCommonGridError
from .fitter import FitResult
from .gammadist import GammaParams
from .timeseries import TimeSeries

TENDENCIES = ("mean", "median", "mode")

BAND_CONVENTION = (
    "band endpoints perturb the central tendency by +/- 3 standard errors "
    "of the mean infectious duration (sigma/sqrt(n), sigma from the fitted "
    "gamma, n the survey sample size); this is a convention of this tool"
)


@dataclass(frozen=True)
class BaselineSpec:
    """One constant-rate estimator: which tendency, on which fitted gamma."""

    tendency: str
    target: str
    survival_probability: float
    gamma: GammaParams
    survey_sample_size: int | None = None

    def __post_init__(self):
        if self.tendency not in TENDENCIES:
            raise DataValidationError(f"unknown tendency {self.tendency!r}")
        if self.target not in ("recovery", "death"):
            raise DataValidationError(f"unknown target {self.target!r}")
        if not 0.0 <= self.survival_probability <= 1.0:
            raise DataValidationError("survival_probability must lie in [0, 1]")
        if self.survey_sample_size is not None and self.survey_sample_size < 1:
            raise DataValidationError("survey_sample_size must be positive")


def tendency_value(spec: BaselineSpec) -> float:
    if spec.tendency == "mean":
        return gammadist.mean(spec.gamma)
    if spec.tendency == "median":
        return gammadist.median(spec.gamma)
    return gammadist.mode(spec.gamma)


def _weight(spec: BaselineSpec) -> float:
    return (spec.survival_probability if spec.target == "recovery"
            else 1.0 - spec.survival_probability)


def constant_rate(spec: BaselineSpec) -> float:
    """r0 = p0 / tendency for recovery, d0 = (1-p0) / tendency for death."""
    value = tendency_value(spec)
    if value <= 0:
        raise DataValidationError(f"{spec.tendency} of the fitted gamma is not positive")
    return _weight(spec) / value


def classical_curve(spec: BaselineSpec, active: TimeSeries) -> TimeSeries:
    """Constant-rate prediction rate * I(t) on the active series' grid."""
    rate = constant_rate(spec)
    label = "new_recoveries" if spec.target == "recovery" else "new_deaths"
    return TimeSeries(times=active.times.copy(), values=rate * active.values,
                      label=label, time_unit=active.time_unit)


def three_sigma_band(spec: BaselineSpec, active: TimeSeries):
    """Lower and upper constant-rate curves from perturbed tendencies.

    The tendency moves by +/- 3 sigma/sqrt(n); a larger duration gives a
    smaller rate, so the lower curve comes from the + perturbation.
    """
    if spec.survey_sample_size is None:
        raise DataValidationError("three_sigma_band needs survey_sample_size")
    value = tendency_value(spec)
    spread = 3.0 * math.sqrt(gammadist.variance(spec.gamma) / spec.survey_sample_size)
    if value - spread <= 0:
        raise DataValidationError(
            "3-sigma perturbation drives the tendency non-positive "
            f"({value} -+ {spread})")
    w = _weight(spec)
    label = "new_recoveries" if spec.target == "recovery" else "new_deaths"
    lower = TimeSeries(times=active.times.copy(),
                       values=(w / (value + spread)) * active.values,
                       label=label, time_unit=active.time_unit)
    upper = TimeSeries(times=active.times.copy(),
                       values=(w / (value - spread)) * active.values,
                       label=label, time_unit=active.time_unit)
    return lower, upper


def band_rates(spec: BaselineSpec) -> tuple[float, float]:
    """(lower, upper) rates implied by the 3-sigma tendency perturbation."""
    value = tendency_value(spec)
    spread = 3.0 * math.sqrt(gammadist.variance(spec.gamma) / spec.survey_sample_size)
    if value - spread <= 0:
        raise DataValidationError("3-sigma perturbation drives the tendency non-positive")
    w = _weight(spec)
    return w / (value + spread), w / (value - spread)


def _common_indices(a: np.ndarray, b: np.ndarray):
    """Index pairs of exactly matching stamps in two sorted time arrays."""
    _, ia, ib = np.intersect1d(a, b, return_indices=True)
    return ia, ib


def compare(fit: FitResult, baselines: list[BaselineSpec],
            active: TimeSeries, observed: TimeSeries) -> dict:
    """Score the distributed fit and each constant-rate baseline.

    All SSEs are computed on the stamps common to the observed series,
    the active series and the fitted curve.
    """
    ia, io = _common_indices(active.times, observed.times)
    if len(ia) == 0:
        raise NoCommonGridError("active and observed series share no time stamps")
    common_times = active.times[ia]
    _, ip, ic = np.intersect1d(fit.predicted.times, common_times,
                               return_indices=True)
    if len(ip) == 0:
        raise NoCommonGridError("fitted curve shares no time stamps with the data")
    common_times = fit.predicted.times[ip]
    obs_vals = observed.values[io][ic]
    act_vals = active.values[ia][ic]
    pred_vals = fit.predicted.values[ip]

    d = pred_vals - obs_vals
    results = {
        "distributed": {
            "shape": fit.optimal.shape,
            "scale": fit.optimal.scale,
            "sse": float(np.dot(d, d)),
        },
        "baselines": [],
        "n_common_times": int(len(common_times)),
        "band_convention": BAND_CONVENTION,
    }
    for spec in baselines:
        rate = constant_rate(spec)
        d = rate * act_vals - obs_vals
        entry = {
            "tendency": spec.tendency,
            "tendency_value": tendency_value(spec),
            "rate": rate,
            "sse": float(np.dot(d, d)),
        }
        if spec.survey_sample_size is not None:
            lo, hi = band_rates(spec)
            entry["band"] = {"rate_lower": lo, "rate_upper": hi,
                             "sample_size": spec.survey_sample_size}
        results["baselines"].append(entry)
    ordering = [("distributed", results["distributed"]["sse"])]
    ordering += [(e["tendency"], e["sse"]) for e in results["baselines"]]
    ordering.sort(key=lambda item: item[1])
    results["ordering"] = [name for name, _ in ordering]
    return results
