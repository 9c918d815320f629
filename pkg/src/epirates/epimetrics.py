"""Derived epidemiological scalars: survival probability, reproduction
number for time-since-infection dependent removal, herd-immunity threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import gammadist
from .errors import DataValidationError
from .gammadist import GammaParams

TRUNCATION_TAIL_MASS = 1e-12


@dataclass(frozen=True)
class TransmissionProfile:
    """Transmission rate, either a constant or tabulated over time-since-infection.

    Tabulated values are interpolated linearly between knots and held
    constant beyond the last knot.
    """

    kind: str
    constant_value: float | None = None
    eta: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "constant":
            if self.constant_value is None or self.eta is not None:
                raise DataValidationError("constant profile takes only constant_value")
            if self.constant_value < 0:
                raise DataValidationError("transmission rate must be non-negative")
        elif self.kind == "tabulated":
            if self.eta is None or self.values is None or self.constant_value is not None:
                raise DataValidationError("tabulated profile takes eta and values")
            eta = np.asarray(self.eta, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if eta.ndim != 1 or eta.shape != values.shape or len(eta) < 1:
                raise DataValidationError("eta and values must be equal-length vectors")
            if eta[0] != 0.0:
                raise DataValidationError("tabulated eta values must start at 0")
            if np.any(np.diff(eta) <= 0):
                raise DataValidationError("tabulated eta values must be strictly increasing")
            if np.any(values < 0):
                raise DataValidationError("transmission rates must be non-negative")
            object.__setattr__(self, "eta", eta)
            object.__setattr__(self, "values", values)
        else:
            raise DataValidationError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def constant(cls, beta: float) -> "TransmissionProfile":
        return cls(kind="constant", constant_value=float(beta))

    @classmethod
    def tabulated(cls, eta, values) -> "TransmissionProfile":
        return cls(kind="tabulated", eta=np.asarray(eta, dtype=float),
                   values=np.asarray(values, dtype=float))

    def at(self, points) -> np.ndarray:
        """Transmission rate at the given times-since-infection."""
        points = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.full(points.shape, self.constant_value)
        return np.interp(points, self.eta, self.values)


@dataclass(frozen=True)
class EpiContext:
    """Initial susceptibles, population size and latent period."""

    susceptible_initial: float
    population: float
    latent_period: float = 0.0

    def __post_init__(self):
        if not 0 < self.susceptible_initial <= self.population:
            raise DataValidationError("need 0 < susceptible_initial <= population")
        if self.latent_period < 0:
            raise DataValidationError("latent period must be non-negative")


def estimate_survival_probability(cumulative_recoveries_end: float,
                                  cumulative_deaths_end: float) -> float:
    """Fraction of closed cases that recovered: R_end / (R_end + D_end)."""
    r, d = float(cumulative_recoveries_end), float(cumulative_deaths_end)
    if r < 0 or d < 0:
        raise DataValidationError("cumulative counts must be non-negative")
    if r + d <= 0:
        raise DataValidationError("no closed cases: cannot estimate survival probability")
    return r / (r + d)


def basic_reproduction_number(ctx: EpiContext, profile: TransmissionProfile,
                              recovery: GammaParams, death: GammaParams,
                              p0: float, dt: float) -> float:
    """Secondary infections per infective under distributed removal.

    Integrates (S0/N) beta(eta) eta (p0 f_r(eta) + (1-p0) f_d(eta)) from
    the latent period up to the point where both kernel tails fall below
    1e-12, by trapezoid at step dt.
    """
    if dt <= 0:
        raise DataValidationError("quadrature step must be positive")
    if not 0.0 <= p0 <= 1.0:
        raise DataValidationError("survival probability must lie in [0, 1]")
    upper = max(
        gammadist.truncation_time(recovery, TRUNCATION_TAIL_MASS, step=dt),
        gammadist.truncation_time(death, TRUNCATION_TAIL_MASS, step=dt),
    )
    tau = ctx.latent_period
    if tau >= upper:
        return 0.0
    n_full = int(math.floor((upper - tau) / dt + 1e-9))
    nodes = tau + dt * np.arange(n_full + 1)
    if upper - nodes[-1] > 1e-9 * upper:
        nodes = np.append(nodes, upper)
    mix = p0 * gammadist.pdf(recovery, nodes) + (1.0 - p0) * gammadist.pdf(death, nodes)
    integrand = np.where(nodes == 0.0, 0.0, nodes * mix)
    share = ctx.susceptible_initial / ctx.population
    if profile.kind == "constant":
        return float(profile.constant_value * share
                     * np.trapezoid(integrand, nodes))
    return float(share * np.trapezoid(profile.at(nodes) * integrand, nodes))


def herd_immunity_threshold(r0: float) -> float:
    """Minimum immunized fraction 1 - 1/R0, clamped to 0 at criticality."""
    if r0 <= 0:
        raise DataValidationError("reproduction number must be positive")
    return max(0.0, 1.0 - 1.0 / r0)
