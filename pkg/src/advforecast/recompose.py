"""Recomposition rules turning (p_B, p_C) into a forecast of the act.

p_B is the adversary's status-quo utility (elicited as the minimum
success probability at which he would act) and p_C his success
probability if he acts. With best/worst outcomes normalized to utility
1/0, acting has expected utility p_C against p_B for staying put, and a
choice rule converts that comparison into a probability that he acts:

* EUM   step function: 1 if p_C > p_B, 1/2 at equality, 0 otherwise.
* ARA   probit-style: 1 - Phi((p_B - p_C) / sigma2), where sigma2
        measures the forecaster's uncertainty about her own assessments.
        Note the divisor is the variance sigma2, not the standard
        deviation; a plain-sigma probit behaves the same qualitatively,
        but sigma2 is the definition used throughout this package.
* ARU   Luce's axiomatic random utility: p_C / (p_C + p_B).
* MNL   multinomial logit (softmax): e^{p_C} / (e^{p_C} + e^{p_B}).

All four rules are coherent by construction: the forecast sides with 1/2
exactly as p_C sides with p_B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from advforecast.errors import ValidationError
from advforecast.imprecision import ImprecisionModel, make_rng
from advforecast.judgments import KnowledgeLevel, Probability

RULE_TAGS = ("EUM", "ARA", "ARU", "MNL")


@dataclass(frozen=True)
class RecompositionRule:
    """A rule tag plus, for ARA only, its uncertainty parameter."""

    tag: str
    sigma2: Optional[float] = None

    def __post_init__(self) -> None:
        if self.tag not in RULE_TAGS:
            raise ValidationError(f"rule tag {self.tag!r} not in {RULE_TAGS}")
        if self.tag == "ARA":
            if self.sigma2 is None or self.sigma2 <= 0:
                raise ValidationError("ARA rule requires sigma2 > 0")
        elif self.sigma2 is not None:
            raise ValidationError(f"sigma2 is only meaningful for ARA, not {self.tag}")

    def apply(self, pB: float, pC: float) -> Probability:
        if self.tag == "EUM":
            return recompose_eum(pB, pC)
        if self.tag == "ARA":
            return recompose_ara(pB, pC, self.sigma2)
        if self.tag == "ARU":
            return recompose_aru(pB, pC)
        return recompose_mnl(pB, pC)

    def apply_array(self, pB: np.ndarray, pC: np.ndarray) -> np.ndarray:
        """Vectorized form of apply, used by Monte Carlo propagation."""
        b = np.asarray(pB, dtype=float)
        c = np.asarray(pC, dtype=float)
        if self.tag == "EUM":
            return np.where(c > b, 1.0, np.where(c < b, 0.0, 0.5))
        if self.tag == "ARA":
            return 1.0 - ndtr((b - c) / self.sigma2)
        if self.tag == "ARU":
            s = b + c
            out = np.full_like(b, 0.5)
            nz = s > 0
            out[nz] = c[nz] / s[nz]
            return out
        return 1.0 / (1.0 + np.exp(b - c))


@dataclass(frozen=True)
class RecomposedForecast:
    rule: RecompositionRule
    estimate: Probability
    pB: Probability
    pC: Probability


def recompose(rule: RecompositionRule, pB: float, pC: float) -> RecomposedForecast:
    return RecomposedForecast(
        rule=rule,
        estimate=rule.apply(pB, pC),
        pB=Probability(pB),
        pC=Probability(pC),
    )


def recompose_eum(pB: float, pC: float) -> Probability:
    """Expected-utility maximizer: act iff success probability clears p_B."""
    _check_unit(pB, pC)
    if pC > pB:
        return Probability(1.0)
    if pC < pB:
        return Probability(0.0)
    return Probability(0.5)


def recompose_ara(pB: float, pC: float, sigma2: float) -> Probability:
    """1 - Phi((p_B - p_C) / sigma2) with Phi the standard normal CDF."""
    _check_unit(pB, pC)
    if sigma2 <= 0:
        raise ValidationError("sigma2 must be positive")
    return Probability(float(1.0 - ndtr((pB - pC) / sigma2)))


def recompose_aru(pB: float, pC: float) -> Probability:
    """Luce rule p_C / (p_C + p_B); the 0/0 case returns indifference 1/2."""
    _check_unit(pB, pC)
    if pB == 0.0 and pC == 0.0:
        return Probability(0.5)
    return Probability(pC / (pC + pB))


def recompose_mnl(pB: float, pC: float) -> Probability:
    """Binary softmax e^{p_C} / (e^{p_C} + e^{p_B}) = logistic(p_C - p_B).

    Branches on the gap sign so that swapping the arguments yields the
    exact floating-point complement.
    """
    _check_unit(pB, pC)
    if pC >= pB:
        return Probability(1.0 / (1.0 + math.exp(pB - pC)))
    return Probability(1.0 - 1.0 / (1.0 + math.exp(pC - pB)))


def choice_distribution(
    utilities: Sequence[float], rule: str
) -> list[Probability]:
    """Choice probabilities over a full alternative set.

    MNL is the softmax of the utilities; ARU normalizes nonnegative
    utilities by their sum. The output sums to 1 within 1e-12.
    """
    if len(utilities) == 0:
        raise ValidationError("utilities must be non-empty")
    u = np.asarray(utilities, dtype=float)
    if rule == "MNL":
        e = np.exp(u - np.max(u))
        p = e / e.sum()
    elif rule == "ARU":
        if np.any(u < 0):
            raise ValidationError("ARU requires nonnegative utilities")
        total = u.sum()
        if total == 0:
            raise ValidationError("ARU is undefined when all utilities are zero")
        p = u / total
    else:
        raise ValidationError(f"choice_distribution supports MNL or ARU, not {rule!r}")
    return [Probability(x) for x in p]


def recompose_mc(
    modelB: ImprecisionModel,
    modelC: ImprecisionModel,
    rule: RecompositionRule,
    n: int,
    seed: int,
) -> np.ndarray:
    """Push n paired draws (b_i, c_i) through the rule.

    b and c are sampled independently from the two fitted betas out of a
    single Philox stream, so the whole vector is reproducible from the
    seed.
    """
    if n < 1:
        raise ValidationError(f"sample size {n} must be >= 1")
    rng = make_rng(seed)
    b = rng.beta(modelB.alpha, modelB.beta, size=n)
    c = rng.beta(modelC.alpha, modelC.beta, size=n)
    return rule.apply_array(b, c)


@dataclass(frozen=True)
class SigmaMap:
    """Knowledge level (1..5) to ARA sigma2, strictly decreasing."""

    table: Mapping[int, float]

    def __post_init__(self) -> None:
        levels = sorted(self.table)
        if levels != [1, 2, 3, 4, 5]:
            raise ValidationError("sigma map must cover knowledge levels 1..5")
        values = [self.table[k] for k in levels]
        if any(v <= 0 for v in values):
            raise ValidationError("sigma2 values must be positive")
        if any(a <= b for a, b in zip(values, values[1:])):
            raise ValidationError("sigma2 must strictly decrease with knowledge")

    def __getitem__(self, level: int) -> float:
        return self.table[int(level)]

    def to_dict(self) -> dict[str, float]:
        return {str(k): float(v) for k, v in sorted(self.table.items())}

    @classmethod
    def from_dict(cls, d: Mapping[Union[str, int], float]) -> "SigmaMap":
        return cls({int(k): float(v) for k, v in d.items()})


# Anchored on the sigma2 values displayed for the recomposition surfaces
# (0.1, 0.5, 1, 10); level 4 interpolated geometrically. A configuration
# value, not a constant of the method.
DEFAULT_SIGMA_MAP = SigmaMap({1: 10.0, 2: 1.0, 3: 0.5, 4: 0.25, 5: 0.1})


def sigma2_for(knowledge: KnowledgeLevel, sigma_map: SigmaMap = DEFAULT_SIGMA_MAP) -> float:
    return sigma_map[int(knowledge)]


def ara_surface(
    sigma2: float, grid_step: float = 0.05
) -> list[tuple[float, float, float]]:
    """Evaluate the ARA recomposition over a (p_B, p_C) grid on [0,1]^2.

    Rows are sorted by (p_B, p_C); used to regenerate surface plots for a
    given sigma2.
    """
    if not 0 < grid_step <= 0.1:
        raise ValidationError("grid_step must lie in (0, 0.1]")
    n = int(math.floor(1.0 / grid_step + 1e-9))
    points = [min(i * grid_step, 1.0) for i in range(n + 1)]
    if points[-1] < 1.0 - 1e-12:
        points.append(1.0)
    rows = []
    for b in points:
        for c in points:
            rows.append((b, c, float(recompose_ara(b, c, sigma2))))
    return rows


def surface_to_csv(rows: Iterable[tuple[float, float, float]]) -> str:
    lines = ["pB,pC,p_hat"]
    for b, c, p in rows:
        lines.append(f"{b:.6f},{c:.6f},{p:.6f}")
    return "\n".join(lines) + "\n"


def _check_unit(*values: float) -> None:
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"probability {v!r} outside [0, 1]")
