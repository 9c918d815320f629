import numpy as np
import pytest

from epirates import (
    EpiContext,
    GammaParams,
    TransmissionProfile,
    basic_reproduction_number,
    estimate_survival_probability,
    herd_immunity_threshold,
)
from epirates.errors import DataValidationError


class TestSurvivalProbability:
    def test_ratio(self):
        assert estimate_survival_probability(97, 3) == pytest.approx(0.97)

    def test_all_recovered(self):
        assert estimate_survival_probability(5, 0) == 1.0

    def test_all_died(self):
        assert estimate_survival_probability(0, 5) == 0.0

    def test_no_closed_cases(self):
        with pytest.raises(DataValidationError):
            estimate_survival_probability(0, 0)

    def test_negative_counts(self):
        with pytest.raises(DataValidationError):
            estimate_survival_probability(-1, 5)


class TestTransmissionProfile:
    def test_constant_at(self):
        profile = TransmissionProfile.constant(0.3)
        assert profile.at([0.0, 5.0, 100.0]) == pytest.approx([0.3] * 3)

    def test_tabulated_interpolates(self):
        profile = TransmissionProfile.tabulated([0.0, 2.0, 4.0], [0.0, 1.0, 0.5])
        assert profile.at([1.0]) == pytest.approx([0.5])
        assert profile.at([3.0]) == pytest.approx([0.75])

    def test_constant_beyond_last_knot(self):
        profile = TransmissionProfile.tabulated([0.0, 2.0], [0.2, 0.6])
        assert profile.at([10.0, 100.0]) == pytest.approx([0.6, 0.6])

    def test_eta_must_start_at_zero(self):
        with pytest.raises(DataValidationError):
            TransmissionProfile.tabulated([1.0, 2.0], [0.1, 0.2])

    def test_eta_must_increase(self):
        with pytest.raises(DataValidationError):
            TransmissionProfile.tabulated([0.0, 2.0, 2.0], [0.1, 0.2, 0.3])

    def test_negative_rates_rejected(self):
        with pytest.raises(DataValidationError):
            TransmissionProfile.constant(-0.1)
        with pytest.raises(DataValidationError):
            TransmissionProfile.tabulated([0.0, 1.0], [0.1, -0.2])


class TestEpiContext:
    def test_bounds(self):
        with pytest.raises(DataValidationError):
            EpiContext(susceptible_initial=0, population=100)
        with pytest.raises(DataValidationError):
            EpiContext(susceptible_initial=200, population=100)
        with pytest.raises(DataValidationError):
            EpiContext(susceptible_initial=50, population=100, latent_period=-1)


def r0(beta, recovery, death, p0, tau=0.0, s_frac=1.0, dt=0.01):
    ctx = EpiContext(susceptible_initial=s_frac * 1e6, population=1e6,
                     latent_period=tau)
    return basic_reproduction_number(ctx, TransmissionProfile.constant(beta),
                                     recovery, death, p0, dt)


class TestBasicReproductionNumber:
    def test_first_moment_identity(self):
        # p0 = 1, tau = 0: the integral is the kernel mean a b
        g = GammaParams(2, 5)
        assert r0(0.1, g, GammaParams(2, 1), 1.0) == pytest.approx(1.0, rel=1e-4)

    def test_identical_kernels_collapse_the_mixture(self):
        g = GammaParams(4.7, 4.5)
        mixed = r0(0.2, g, g, 0.5)
        pure = r0(0.2, g, g, 1.0)
        assert mixed == pytest.approx(pure, rel=1e-12)

    def test_latency_strictly_reduces(self):
        g = GammaParams(4.7, 4.5)
        assert r0(0.1, g, g, 0.97, tau=2.0) < r0(0.1, g, g, 0.97, tau=0.0)

    def test_doubling_beta_doubles(self):
        g = GammaParams(3, 2)
        assert r0(0.2, g, g, 0.9) == pytest.approx(2 * r0(0.1, g, g, 0.9), rel=1e-12)

    def test_susceptible_share_scales(self):
        g = GammaParams(3, 2)
        assert r0(0.1, g, g, 0.9, s_frac=0.5) == pytest.approx(
            0.5 * r0(0.1, g, g, 0.9), rel=1e-12)

    def test_moment_identity_random_draws(self, rng):
        for _ in range(10):
            ar, br = rng.uniform(1.2, 10), rng.uniform(0.1, 10)
            ad, bd = rng.uniform(1.2, 10), rng.uniform(0.1, 10)
            p0 = rng.uniform(0, 1)
            beta = rng.uniform(0.01, 1.0)
            expected = beta * (p0 * ar * br + (1 - p0) * ad * bd)
            got = r0(beta, GammaParams(ar, br), GammaParams(ad, bd), p0,
                     dt=min(br, bd) / 200)
            assert got == pytest.approx(expected, rel=1e-4)

    def test_tabulated_profile_weights_the_integrand(self):
        # beta(eta) = eta on the kernel's support turns the first moment
        # into the second moment: E[eta^2] = a b^2 (1 + a)
        g = GammaParams(3, 1)
        upper = 100.0
        profile = TransmissionProfile.tabulated([0.0, upper], [0.0, upper])
        ctx = EpiContext(susceptible_initial=1e6, population=1e6)
        got = basic_reproduction_number(ctx, profile, g, g, 1.0, 0.005)
        assert got == pytest.approx(3 * 1 * 4, rel=1e-3)

    def test_latency_beyond_support_gives_zero(self):
        g = GammaParams(2, 0.1)
        assert r0(0.5, g, g, 1.0, tau=1e5) == 0.0

    def test_bad_quadrature_step(self):
        g = GammaParams(2, 1)
        ctx = EpiContext(susceptible_initial=1e6, population=1e6)
        with pytest.raises(DataValidationError):
            basic_reproduction_number(ctx, TransmissionProfile.constant(0.1),
                                      g, g, 0.9, 0.0)


class TestHerdImmunityThreshold:
    @pytest.mark.parametrize("value,expected", [
        (18, 0.9444), (6, 0.8333), (8, 0.875), (2.3, 0.5652),
    ])
    def test_reported_values(self, value, expected):
        assert herd_immunity_threshold(value) == pytest.approx(expected, abs=5e-5)

    def test_criticality(self):
        assert herd_immunity_threshold(1.0) == 0.0

    def test_subcritical_clamps_to_zero(self):
        assert herd_immunity_threshold(0.5) == 0.0

    def test_monotone_above_one(self, rng):
        values = np.sort(rng.uniform(1.0, 50.0, size=50))
        thresholds = [herd_immunity_threshold(float(v)) for v in values]
        assert np.all(np.diff(thresholds) >= 0)
        assert all(0 <= t < 1 for t in thresholds)

    def test_non_positive_rejected(self):
        with pytest.raises(DataValidationError):
            herd_immunity_threshold(0.0)
        with pytest.raises(DataValidationError):
            herd_immunity_threshold(-2.0)
