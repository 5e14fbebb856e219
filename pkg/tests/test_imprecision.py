"""Beta-fit calibration, checked against an independent quadrature oracle.

The oracle never touches scipy's incomplete beta: it integrates the beta
density (written out via lgamma) with adaptive quadrature.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from advforecast.errors import FitConvergenceError, ValidationError
from advforecast.imprecision import (
    ImprecisionModel,
    clear_fit_cache,
    fit_beta,
    sample,
)
from advforecast.judgments import interval_from_selection


def beta_pdf(x: float, a: float, b: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    return math.exp(log_norm + (a - 1) * math.log(x) + (b - 1) * math.log(1 - x))


def oracle_mass(a: float, b: float, lo: float, hi: float) -> float:
    value, err = quad(beta_pdf, lo, hi, args=(a, b), limit=200)
    assert err < 1e-8
    return value


@pytest.fixture(autouse=True)
def fresh_cache():
    clear_fit_cache()
    yield
    clear_fit_cache()


class TestFitBeta:
    def test_reference_interval(self):
        model = fit_beta(interval_from_selection(30), 0.9)
        assert abs(model.alpha - 68.08) <= 0.5
        assert abs(model.beta - 158.56) <= 0.5

    def test_reference_interval_calibration(self):
        model = fit_beta(interval_from_selection(30), 0.9)
        assert model.cdf(0.35) - model.cdf(0.25) == pytest.approx(0.9, abs=1e-6)
        assert model.median() == pytest.approx(0.30, abs=1e-6)

    def test_symmetric_interval_equal_shapes(self):
        model = fit_beta(interval_from_selection(50), 0.9)
        assert model.alpha == pytest.approx(model.beta, abs=1e-6)

    def test_low_interval_against_quadrature_oracle(self):
        model = fit_beta(interval_from_selection(10), 0.9)
        assert oracle_mass(model.alpha, model.beta, 0.05, 0.15) == pytest.approx(0.9, abs=1e-6)
        # CDF at the midpoint must be one half: median at 0.10
        assert oracle_mass(model.alpha, model.beta, 0.0, 0.10) == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("selection", [0, 10, 50, 90, 100])
    def test_all_grid_fits_calibrate(self, selection):
        iv = interval_from_selection(selection)
        model = fit_beta(iv, 0.9)
        got = oracle_mass(model.alpha, model.beta, iv.interval_lo, iv.interval_hi)
        assert got == pytest.approx(0.9, abs=1e-6)
        assert model.median() == pytest.approx(iv.midpoint, abs=1e-6)

    def test_deterministic_bitwise(self):
        a = fit_beta(interval_from_selection(30), 0.9)
        clear_fit_cache()
        b = fit_beta(interval_from_selection(30), 0.9)
        assert (a.alpha, a.beta) == (b.alpha, b.beta)

    def test_cache_returns_same_model(self):
        assert fit_beta(interval_from_selection(30)) is fit_beta(interval_from_selection(30))

    def test_rejects_bad_mass(self):
        with pytest.raises(ValidationError):
            fit_beta(interval_from_selection(30), interval_mass=1.0)

    def test_rejects_bad_tol(self):
        with pytest.raises(ValidationError):
            fit_beta(interval_from_selection(30), tol=0.0)

    def test_fit_failure_carries_residuals(self):
        # An unreachable tolerance exhausts the budget.
        with pytest.raises(FitConvergenceError) as exc_info:
            fit_beta(interval_from_selection(30), tol=1e-300)
        assert len(exc_info.value.residuals) == 2


class TestSampling:
    def test_mean_matches_reference_fit(self):
        model = fit_beta(interval_from_selection(30), 0.9)
        draws = sample(model, 100_000, seed=11)
        assert draws.mean() == pytest.approx(model.alpha / (model.alpha + model.beta), abs=0.005)
        assert draws.mean() == pytest.approx(0.3004, abs=0.005)

    def test_symmetric_beta_mean(self):
        model = ImprecisionModel(2.0, 2.0, interval_from_selection(50))
        assert sample(model, 100_000, seed=5).mean() == pytest.approx(0.5, abs=0.005)

    def test_same_seed_same_sequence(self):
        model = fit_beta(interval_from_selection(70))
        assert np.array_equal(sample(model, 1000, seed=42), sample(model, 1000, seed=42))

    def test_different_seed_differs(self):
        model = fit_beta(interval_from_selection(70))
        assert not np.array_equal(sample(model, 1000, seed=42), sample(model, 1000, seed=43))

    @pytest.mark.parametrize("selection", [0, 30, 100])
    def test_interval_coverage_matches_mass(self, selection):
        iv = interval_from_selection(selection)
        model = fit_beta(iv, 0.9)
        draws = sample(model, 100_000, seed=7)
        inside = np.mean((draws >= iv.interval_lo) & (draws <= iv.interval_hi))
        assert inside == pytest.approx(0.9, abs=0.01)

    def test_rejects_empty_sample(self):
        model = fit_beta(interval_from_selection(30))
        with pytest.raises(ValidationError):
            sample(model, 0, seed=1)


class TestModelValidation:
    def test_rejects_nonpositive_shapes(self):
        iv = interval_from_selection(30)
        with pytest.raises(ValidationError):
            ImprecisionModel(0.0, 1.0, iv)
        with pytest.raises(ValidationError):
            ImprecisionModel(1.0, -2.0, iv)
