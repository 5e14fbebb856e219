"""Coherent-participant selection and forecast pooling.

Participants whose direct judgment agrees in sign with the decomposed
pair on every question form a synthetic participant: per question, their
recomposed estimates are averaged, and the pool is Brier-scored against
the recorded outcomes. Pooling uses the deterministic midpoint path by
default (a single pooled number per question); Monte Carlo pooling over
the fitted betas is available behind a flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from advforecast.consistency import classify
from advforecast.errors import AggregationError
from advforecast.imprecision import fit_beta
from advforecast.judgments import JudgmentSet, Probability
from advforecast.recompose import (
    DEFAULT_SIGMA_MAP,
    RecompositionRule,
    SigmaMap,
    recompose_mc,
    sigma2_for,
)
from advforecast.scoring import brier, record_seed


def mean_in_order(values: Sequence[float]) -> float:
    """Sequential mean in the given order; bitwise reproducible."""
    if not values:
        raise AggregationError("cannot average an empty sequence")
    total = 0.0
    for v in values:
        total += float(v)
    return total / len(values)


@dataclass(frozen=True)
class PooledForecast:
    question_id: str
    rule_tag: str
    estimate: Probability
    n_contributors: int

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "rule": self.rule_tag,
            "estimate": float(self.estimate),
            "n_contributors": self.n_contributors,
        }


def select_coherent(
    sets: Sequence[JudgmentSet],
    tie_policy: str = "consistent",
    use_revised: bool = False,
) -> list[str]:
    """Participants consistent on every one of their questions."""
    verdicts: dict[str, bool] = {}
    for js in sets:
        ok = classify(js, use_revised).counts_consistent(tie_policy)
        verdicts[js.participant_id] = verdicts.get(js.participant_id, True) and ok
    return sorted(pid for pid, ok in verdicts.items() if ok)


def pool(
    sets: Sequence[JudgmentSet],
    selected: Sequence[str],
    rule: Union[str, RecompositionRule],
    sigma_map: SigmaMap = DEFAULT_SIGMA_MAP,
    outcomes: Optional[Mapping[str, int]] = None,
    use_monte_carlo: bool = False,
    n_mc: int = 10_000,
    seed: int = 0,
) -> tuple[list[PooledForecast], Optional[float]]:
    """Average selected participants' recomposed estimates per question.

    Contributors are averaged in sorted participant order so re-runs are
    bitwise identical. When ``outcomes`` covers the pooled questions the
    aggregate Brier (mean over questions) is returned alongside.
    """
    if not selected:
        raise AggregationError(
            "no participants selected; consider tie_policy='consistent' or a larger population"
        )
    chosen = set(selected)
    by_question: dict[str, list[JudgmentSet]] = {}
    for js in sets:
        if js.participant_id in chosen:
            by_question.setdefault(js.question_id, []).append(js)

    pooled: list[PooledForecast] = []
    for qid in sorted(by_question):
        group = sorted(by_question[qid], key=lambda js: js.participant_id)
        estimates = [_estimate(js, rule, sigma_map, use_monte_carlo, n_mc, seed) for js in group]
        pooled.append(
            PooledForecast(
                question_id=qid,
                rule_tag=rule.tag if isinstance(rule, RecompositionRule) else rule,
                estimate=Probability(mean_in_order(estimates)),
                n_contributors=len(estimates),
            )
        )

    aggregate = None
    if outcomes is not None:
        scored = [pf for pf in pooled if pf.question_id in outcomes]
        if scored:
            aggregate = mean_in_order(
                [brier(pf.estimate, outcomes[pf.question_id]) for pf in scored]
            )
    return pooled, aggregate


def _estimate(
    js: JudgmentSet,
    rule: Union[str, RecompositionRule],
    sigma_map: SigmaMap,
    use_monte_carlo: bool,
    n_mc: int,
    seed: int,
) -> float:
    if not isinstance(rule, RecompositionRule):
        sigma2 = sigma2_for(js.knowledge, sigma_map) if rule == "ARA" else None
        rule = RecompositionRule(rule, sigma2)
    if not use_monte_carlo:
        return float(rule.apply(js.pB.midpoint, js.pC.midpoint))
    forecasts = recompose_mc(
        fit_beta(js.pB),
        fit_beta(js.pC),
        rule,
        n_mc,
        record_seed(seed, js.participant_id, js.question_id, f"pool-{rule.tag}"),
    )
    return float(np.mean(forecasts))
