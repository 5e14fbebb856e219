"""Bayesian paired-difference analysis of Brier scores.

Under a normal likelihood with the Jeffreys reference prior
p(mu, tau^2) proportional to 1/tau^2, the marginal posterior of the mean
difference is a location-scale Student-t with n-1 degrees of freedom,
centered at the sample mean with scale s/sqrt(n). Central credible
intervals therefore coincide numerically with the classical t interval.
This is the standard noninformative paired analysis; other priors are
deliberately out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import t as student_t

from advforecast.errors import DegenerateSampleError, ValidationError
from advforecast.scoring import ScoreRecord

DEFAULT_LEVEL = 0.95


@dataclass(frozen=True)
class PairedDiffResult:
    comparison: str
    n: int
    mean_diff: float
    ci_low: float
    ci_high: float
    level: float = DEFAULT_LEVEL
    n_dropped: int = 0

    def __post_init__(self) -> None:
        if not self.ci_low <= self.mean_diff <= self.ci_high:
            raise ValidationError("interval endpoints do not bracket the mean")

    @property
    def excludes_zero(self) -> bool:
        return self.ci_low > 0.0 or self.ci_high < 0.0

    def to_dict(self) -> dict:
        return {
            "comparison": self.comparison,
            "n": self.n,
            "mean_diff": self.mean_diff,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "level": self.level,
            "n_dropped": self.n_dropped,
        }


def credible_interval(
    diffs: Sequence[float],
    level: float = DEFAULT_LEVEL,
    comparison: str = "",
    n_dropped: int = 0,
) -> PairedDiffResult:
    """Central credible interval for the mean of paired differences.

    Posterior: mu | data ~ mean + (s/sqrt(n)) * t_{n-1}. Requires n >= 2
    and a non-degenerate sample.
    """
    d = np.asarray(diffs, dtype=float)
    if d.size < 2:
        raise DegenerateSampleError(f"need at least 2 paired differences, got {d.size}")
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level {level} must lie in (0, 1)")
    mean = float(d.mean())
    s = float(d.std(ddof=1))
    if s == 0.0:
        raise DegenerateSampleError("paired differences have zero variance")
    scale = s / np.sqrt(d.size)
    q = float(student_t.ppf((1.0 + level) / 2.0, df=d.size - 1))
    return PairedDiffResult(
        comparison=comparison,
        n=int(d.size),
        mean_diff=mean,
        ci_low=mean - q * scale,
        ci_high=mean + q * scale,
        level=level,
        n_dropped=n_dropped,
    )


def _paired_means(
    records: Sequence[ScoreRecord], kind_a: str, kind_b: str
) -> tuple[list[float], list[float], int]:
    """Per-(participant, question) Monte Carlo means for two kinds.

    Pairs missing either kind are dropped; the count is reported back.
    """
    a_by_key = {r.key: r for r in records if r.forecast_kind == kind_a}
    b_by_key = {r.key: r for r in records if r.forecast_kind == kind_b}
    keys = sorted(a_by_key.keys() & b_by_key.keys())
    dropped = len(a_by_key.keys() | b_by_key.keys()) - len(keys)
    a = [a_by_key[k].mc_mean for k in keys]
    b = [b_by_key[k].mc_mean for k in keys]
    return a, b, dropped


def compare_kinds(
    records: Sequence[ScoreRecord],
    kind_a: str,
    kind_b: str,
    level: float = DEFAULT_LEVEL,
) -> PairedDiffResult:
    """Credible interval for mean score difference kind_a - kind_b."""
    a, b, dropped = _paired_means(records, kind_a, kind_b)
    diffs = [x - y for x, y in zip(a, b)]
    return credible_interval(
        diffs,
        level=level,
        comparison=f"{kind_a}-minus-{kind_b}",
        n_dropped=dropped,
    )


def reflection_effect(
    records: Sequence[ScoreRecord], level: float = DEFAULT_LEVEL
) -> Optional[PairedDiffResult]:
    """Paired comparison direct-pA vs direct-pD where the two differ.

    Restriction: pairs whose point scores differ. Against a common
    outcome the Brier score is strictly monotone in the forecast, so
    unequal point scores is exactly unequal midpoints, i.e. a revised
    answer. Returns None when nobody revised.
    """
    a_by_key = {r.key: r for r in records if r.forecast_kind == "direct-pA"}
    d_by_key = {r.key: r for r in records if r.forecast_kind == "direct-pD"}
    keys = sorted(a_by_key.keys() & d_by_key.keys())
    dropped = len(a_by_key.keys() | d_by_key.keys()) - len(keys)
    diffs = []
    for k in keys:
        ra, rd = a_by_key[k], d_by_key[k]
        if ra.point_score != rd.point_score:
            diffs.append(ra.mc_mean - rd.mc_mean)
    if not diffs:
        return None
    return credible_interval(
        diffs,
        level=level,
        comparison="direct-pA-minus-direct-pD[changed]",
        n_dropped=dropped,
    )


def intervals_csv(results: Sequence[PairedDiffResult]) -> str:
    lines = ["comparison,n,mean,lo,hi"]
    for r in results:
        lines.append(f"{r.comparison},{r.n},{r.mean_diff:.6f},{r.ci_low:.6f},{r.ci_high:.6f}")
    return "\n".join(lines) + "\n"
