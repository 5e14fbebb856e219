"""Beta models for the imprecision of interval responses.

An interval response pins the elicited probability only to a 10%-wide
interval, so downstream analysis treats it as a random probability: a
beta distribution calibrated so the interval carries a fixed probability
mass (default 0.9) and the distribution's median sits at the interval
midpoint. The two calibration equations

    CDF(hi) - CDF(lo) = mass        and        CDF(mid) = 1/2

are solved by nested bisection: the inner loop finds, for a candidate
concentration kappa = alpha + beta, the alpha that places the median at
the midpoint; the outer loop adjusts kappa until the interval mass
matches. Both residuals are driven below ``tol``.

The regularized incomplete beta function comes from scipy.special
(betainc / betaincinv), accurate to well below 1e-10 over this domain.
Sampling uses numpy's counter-based Philox generator so that any draw is
reproducible from its seed alone.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaincinv, ndtri

from advforecast.errors import FitConvergenceError, ValidationError
from advforecast.judgments import IntervalResponse, Probability

# Algorithm identifier recorded in report manifests for reproducibility.
RNG_ALGORITHM = "philox4x64"

DEFAULT_INTERVAL_MASS = 0.9
DEFAULT_FIT_TOL = 1e-6

# Outer bisection budget; each iteration runs one inner median solve.
_MAX_OUTER_ITERATIONS = 500
_MAX_INNER_ITERATIONS = 120


@dataclass(frozen=True)
class ImprecisionModel:
    """Fitted Beta(alpha, beta) standing in for an interval response."""

    alpha: float
    beta: float
    source: IntervalResponse

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("beta shape parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def cdf(self, x: float) -> float:
        return float(betainc(self.alpha, self.beta, min(max(x, 0.0), 1.0)))

    def median(self) -> float:
        return float(betaincinv(self.alpha, self.beta, 0.5))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "selection": self.source.selection,
            "interval_lo": float(self.source.interval_lo),
            "interval_hi": float(self.source.interval_hi),
        }


def _median_alpha(kappa: float, m: float) -> float:
    """Alpha such that Beta(alpha, kappa - alpha) has median m.

    CDF(m) is strictly decreasing in alpha at fixed kappa, from 1 (all
    mass at 0) to 0 (all mass at 1), so plain bisection is exact enough
    and bitwise deterministic.
    """
    eps = 1e-10 * kappa
    a_lo, a_hi = eps, kappa - eps
    for _ in range(_MAX_INNER_ITERATIONS):
        a = 0.5 * (a_lo + a_hi)
        if betainc(a, kappa - a, m) > 0.5:
            a_lo = a
        else:
            a_hi = a
        if a_hi - a_lo <= 1e-14 * kappa:
            break
    return 0.5 * (a_lo + a_hi)


def _fit_beta_uncached(
    interval: IntervalResponse, interval_mass: float, tol: float
) -> ImprecisionModel:
    lo, hi = float(interval.interval_lo), float(interval.interval_hi)
    m = float(interval.midpoint)
    if not lo < hi:
        raise ValidationError(f"degenerate interval [{lo}, {hi}]")
    if not 0.0 < m < 1.0:
        raise ValidationError(f"interval midpoint {m} must lie strictly inside (0, 1)")
    if not 0.0 < interval_mass < 1.0:
        raise ValidationError(f"interval_mass {interval_mass} must lie in (0, 1)")
    if tol <= 0:
        raise ValidationError("tol must be positive")

    def mass_at(kappa: float) -> tuple[float, float]:
        a = _median_alpha(kappa, m)
        return float(betainc(a, kappa - a, hi) - betainc(a, kappa - a, lo)), a

    # Initial guess: treat [lo, hi] as the central `interval_mass` range of a
    # normal centered at the midpoint and moment-match its variance to a beta.
    z = float(ndtri((1.0 + interval_mass) / 2.0))
    sd = (hi - lo) / (2.0 * z)
    kappa0 = max(m * (1.0 - m) / sd**2 - 1.0, 2.0)

    k_lo, k_hi = kappa0 / 16.0, kappa0 * 16.0
    for _ in range(60):
        if mass_at(k_lo)[0] <= interval_mass:
            break
        k_lo /= 4.0
    for _ in range(60):
        if mass_at(k_hi)[0] >= interval_mass:
            break
        k_hi *= 4.0

    kappa, alpha = k_hi, _median_alpha(k_hi, m)
    mass_resid = mass_at(kappa)[0] - interval_mass
    for _ in range(_MAX_OUTER_ITERATIONS):
        kappa = 0.5 * (k_lo + k_hi)
        got, alpha = mass_at(kappa)
        mass_resid = got - interval_mass
        if got < interval_mass:
            k_lo = kappa
        else:
            k_hi = kappa
        if abs(mass_resid) <= tol / 4.0 and (k_hi - k_lo) <= 1e-11 * kappa:
            break

    beta = kappa - alpha
    median_resid = float(betaincinv(alpha, beta, 0.5)) - m
    if abs(mass_resid) > tol or abs(median_resid) > tol:
        raise FitConvergenceError(
            f"beta fit for [{lo}, {hi}] did not converge", (mass_resid, median_resid)
        )
    return ImprecisionModel(alpha=alpha, beta=beta, source=interval)


# Only eleven distinct intervals can occur, so fits are cached. Concurrent
# readers are safe; the lock serializes writers.
_fit_cache: dict[tuple[int, float, float], ImprecisionModel] = {}
_fit_cache_lock = threading.Lock()


def fit_beta(
    interval: IntervalResponse,
    interval_mass: float = DEFAULT_INTERVAL_MASS,
    tol: float = DEFAULT_FIT_TOL,
) -> ImprecisionModel:
    """Fit Beta(alpha, beta) to an interval response.

    Calibration: ``CDF(hi) - CDF(lo) == interval_mass`` and median at the
    interval midpoint, both to within ``tol``. Deterministic: identical
    inputs yield bitwise-identical parameters.

    Raises FitConvergenceError (carrying the last residuals) if the
    iteration budget is exhausted, ValidationError on degenerate input.
    """
    key = (interval.selection, interval_mass, tol)
    model = _fit_cache.get(key)
    if model is None:
        model = _fit_beta_uncached(interval, interval_mass, tol)
        with _fit_cache_lock:
            _fit_cache.setdefault(key, model)
    return model


def clear_fit_cache() -> None:
    with _fit_cache_lock:
        _fit_cache.clear()


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) keyed by an integer seed."""
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def sample(model: ImprecisionModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` values from the fitted beta; deterministic given seed."""
    if n < 1:
        raise ValidationError(f"sample size {n} must be >= 1")
    rng = make_rng(seed)
    return rng.beta(model.alpha, model.beta, size=n)


def sample_probability(model: ImprecisionModel, seed: int) -> Probability:
    return Probability(float(sample(model, 1, seed)[0]))
