"""Brier scoring of direct and recomposed forecasts.

Each (participant, question, forecast kind) yields one ScoreRecord with
two evaluation paths: a deterministic point score from interval
midpoints, and a Monte Carlo sample of scores that propagates the
elicitation imprecision by drawing the inputs from their fitted betas.
Per-record seeds are derived from the master seed by hashing, so any
single record is reproducible in isolation:

    seed(record) = first 8 bytes (big-endian) of
                   SHA-256("{master_seed}|{participant}|{question}|{kind}")
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from advforecast.errors import ValidationError
from advforecast.imprecision import fit_beta, make_rng
from advforecast.judgments import JudgmentSet, KnowledgeLevel, Probability
from advforecast.recompose import (
    DEFAULT_SIGMA_MAP,
    RecompositionRule,
    SigmaMap,
    recompose_mc,
    sigma2_for,
)

DIRECT_KINDS = ("direct-pA", "direct-pD")
FORECAST_KINDS = DIRECT_KINDS + ("EUM", "ARA", "ARU", "MNL")

DEFAULT_MC_SAMPLES = 10_000

# Low/medium/high tiers for grouping; the 2/1/2 split is a configurable policy.
DEFAULT_KNOWLEDGE_TIERS: Mapping[int, str] = {1: "low", 2: "low", 3: "medium", 4: "high", 5: "high"}


def brier(f: float, o: int) -> float:
    """Quadratic score (f - o)^2 for a binary outcome; lower is better."""
    if o not in (0, 1):
        raise ValidationError(f"outcome {o!r} must be 0 or 1")
    f = float(Probability(f))
    return (f - o) ** 2


def record_seed(master_seed: int, participant_id: str, question_id: str, kind: str) -> int:
    digest = hashlib.sha256(
        f"{master_seed}|{participant_id}|{question_id}|{kind}".encode()
    ).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ScoreRecord:
    participant_id: str
    question_id: str
    forecast_kind: str
    point_score: float
    scores: np.ndarray = field(repr=False)
    knowledge: KnowledgeLevel = KnowledgeLevel(3)

    def __post_init__(self) -> None:
        if self.forecast_kind not in FORECAST_KINDS:
            raise ValidationError(f"forecast kind {self.forecast_kind!r} unknown")
        if not 0.0 <= self.point_score <= 1.0:
            raise ValidationError("point score outside [0, 1]")
        if self.scores.size == 0:
            raise ValidationError("Monte Carlo score sample is empty")

    @property
    def mc_mean(self) -> float:
        return float(self.scores.mean())

    @property
    def mc_sd(self) -> float:
        return float(self.scores.std(ddof=1)) if self.scores.size > 1 else 0.0

    @property
    def key(self) -> tuple[str, str]:
        return (self.participant_id, self.question_id)


def score_set(
    js: JudgmentSet,
    outcome: int,
    rules: Sequence[Union[str, RecompositionRule]] = ("EUM", "ARA", "ARU", "MNL"),
    sigma_map: SigmaMap = DEFAULT_SIGMA_MAP,
    n_mc: int = DEFAULT_MC_SAMPLES,
    seed: int = 0,
    interval_mass: float = 0.9,
) -> list[ScoreRecord]:
    """Score one judgment set against its realized outcome.

    Produces a record per forecast kind: the two direct kinds score beta
    draws of p_A and p_D; each rule kind scores the Monte Carlo
    recompositions of (p_B, p_C). ARA's sigma2 comes from the knowledge
    map unless an explicit RecompositionRule overrides it. Point scores
    use interval midpoints throughout.
    """
    if outcome not in (0, 1):
        raise ValidationError(f"outcome {outcome!r} must be 0 or 1")
    if n_mc < 1:
        raise ValidationError("n_mc must be >= 1")

    model_b = fit_beta(js.pB, interval_mass)
    model_c = fit_beta(js.pC, interval_mass)
    records = []

    for kind, interval in (("direct-pA", js.pA), ("direct-pD", js.pD)):
        model = fit_beta(interval, interval_mass)
        rng = make_rng(record_seed(seed, js.participant_id, js.question_id, kind))
        draws = rng.beta(model.alpha, model.beta, size=n_mc)
        records.append(
            ScoreRecord(
                participant_id=js.participant_id,
                question_id=js.question_id,
                forecast_kind=kind,
                point_score=brier(interval.midpoint, outcome),
                scores=(draws - outcome) ** 2,
                knowledge=js.knowledge,
            )
        )

    for rule_spec in rules:
        rule = _resolve_rule(rule_spec, js.knowledge, sigma_map)
        forecasts = recompose_mc(
            model_b,
            model_c,
            rule,
            n_mc,
            record_seed(seed, js.participant_id, js.question_id, rule.tag),
        )
        records.append(
            ScoreRecord(
                participant_id=js.participant_id,
                question_id=js.question_id,
                forecast_kind=rule.tag,
                point_score=brier(rule.apply(js.pB.midpoint, js.pC.midpoint), outcome),
                scores=(forecasts - outcome) ** 2,
                knowledge=js.knowledge,
            )
        )
    return records


def _resolve_rule(
    rule_or_tag: Union[str, RecompositionRule], knowledge: KnowledgeLevel, sigma_map: SigmaMap
) -> RecompositionRule:
    if isinstance(rule_or_tag, RecompositionRule):
        return rule_or_tag
    if rule_or_tag == "ARA":
        return RecompositionRule("ARA", sigma2_for(knowledge, sigma_map))
    return RecompositionRule(rule_or_tag)


class EmpiricalCdf:
    """Right-continuous empirical CDF of a score sample in [0, 1]."""

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise ValidationError("empirical CDF needs at least one value")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValidationError("scores must lie in [0, 1]")
        self._sorted = np.sort(v)

    @property
    def n(self) -> int:
        return int(self._sorted.size)

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self._sorted, x, side="right") / self._sorted.size)

    def step_points(self) -> list[tuple[float, float]]:
        """Unique jump locations with the CDF value attained there."""
        xs, counts = np.unique(self._sorted, return_counts=True)
        fs = np.cumsum(counts) / self._sorted.size
        return list(zip(xs.tolist(), fs.tolist()))

    def grid_points(self, step: float = 0.001) -> list[tuple[float, float]]:
        """CDF evaluated on a fixed grid over [0, 1]; compact emission form."""
        n = int(round(1.0 / step))
        xs = [i * step for i in range(n + 1)]
        return [(x, self(x)) for x in xs]


def knowledge_tier(
    level: KnowledgeLevel, tiers: Mapping[int, str] = DEFAULT_KNOWLEDGE_TIERS
) -> str:
    return tiers[int(level)]


def cdf_by_group(
    records: Sequence[ScoreRecord],
    group_by: str,
    tiers: Mapping[int, str] = DEFAULT_KNOWLEDGE_TIERS,
) -> dict[str, dict[str, EmpiricalCdf]]:
    """Pooled Monte Carlo score CDFs per group and forecast kind.

    group_by is "knowledge-tier" (levels mapped through ``tiers``) or
    "question" (grouped by question_id). Groups with no records are
    simply absent from the result.
    """
    if group_by not in ("knowledge-tier", "question"):
        raise ValidationError(f"group_by {group_by!r} must be knowledge-tier or question")
    pooled: dict[str, dict[str, list[np.ndarray]]] = {}
    for rec in records:
        if group_by == "knowledge-tier":
            group = knowledge_tier(rec.knowledge, tiers)
        else:
            group = rec.question_id
        pooled.setdefault(group, {}).setdefault(rec.forecast_kind, []).append(rec.scores)
    return {
        group: {kind: EmpiricalCdf(np.concatenate(chunks)) for kind, chunks in kinds.items()}
        for group, kinds in pooled.items()
    }


def scores_csv(records: Sequence[ScoreRecord]) -> str:
    lines = ["participant_id,question_id,kind,point_score,mc_mean,mc_sd"]
    for rec in sorted(records, key=lambda r: (r.participant_id, r.question_id, r.forecast_kind)):
        lines.append(
            f"{rec.participant_id},{rec.question_id},{rec.forecast_kind},"
            f"{rec.point_score:.6f},{rec.mc_mean:.6f},{rec.mc_sd:.6f}"
        )
    return "\n".join(lines) + "\n"


def cdf_csv(kinds: Mapping[str, EmpiricalCdf], grid_step: float = 0.001) -> str:
    lines = ["kind,x,F"]
    for kind in sorted(kinds):
        for x, f in kinds[kind].grid_points(grid_step):
            lines.append(f"{kind},{x:.6f},{f:.6f}")
    return "\n".join(lines) + "\n"
