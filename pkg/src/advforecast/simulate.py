"""Synthetic-participant generator for end-to-end exercises.

Each simulated question carries a ground-truth pair (u*, pC*): the
adversary's status-quo utility and success probability. The configured
adversary rule converts the pair into his true act probability, the
outcome is drawn from it, and every participant reports noisy,
grid-snapped versions of the underlying quantities. All draws come from
one Philox stream, so a config and seed pin the whole dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from advforecast.errors import ValidationError
from advforecast.imprecision import make_rng
from advforecast.judgments import (
    IntervalResponse,
    JudgmentSet,
    KnowledgeLevel,
    Question,
    interval_from_selection,
)
from advforecast.recompose import RecompositionRule

REVISION_POLICIES = ("none", "repair-half", "repair-all")


@dataclass(frozen=True)
class SimQuestion:
    question_id: str
    u_true: float
    pc_true: float
    text: str = ""
    domain_tag: str = "other"

    def __post_init__(self) -> None:
        for v in (self.u_true, self.pc_true):
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"ground-truth probability {v} outside [0, 1]")


@dataclass(frozen=True)
class SimulationConfig:
    n_participants: int
    questions: Sequence[SimQuestion]
    adversary_rule: RecompositionRule = field(default_factory=lambda: RecompositionRule("EUM"))
    noise_width: float = 0.2
    revision_policy: str = "none"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_participants < 1:
            raise ValidationError("n_participants must be >= 1")
        if not self.questions:
            raise ValidationError("at least one question required")
        if self.noise_width < 0:
            raise ValidationError("noise_width must be nonnegative")
        if self.revision_policy not in REVISION_POLICIES:
            raise ValidationError(f"revision policy {self.revision_policy!r} not in {REVISION_POLICIES}")


def snap_to_grid(value: float) -> int:
    """Nearest 10%-grid selection for a probability value."""
    v = min(max(value, 0.0), 1.0)
    return int(round(v * 10.0)) * 10


def simulate(cfg: SimulationConfig) -> tuple[list[Question], list[JudgmentSet]]:
    """Generate outcomes and judgment sets; deterministic given seed."""
    rng = make_rng(cfg.seed)
    half = cfg.noise_width / 2.0

    def noisy_selection(value: float) -> int:
        noise = rng.uniform(-half, half) if half > 0 else 0.0
        return snap_to_grid(value + noise)

    questions = []
    act_probs = {}
    for sq in cfg.questions:
        p_act = float(cfg.adversary_rule.apply(sq.u_true, sq.pc_true))
        act_probs[sq.question_id] = p_act
        outcome = int(rng.random() < p_act)
        questions.append(
            Question(
                question_id=sq.question_id,
                text=sq.text,
                domain_tag=sq.domain_tag,
                outcome=outcome,
            )
        )

    repair_fraction = {"none": 0.0, "repair-half": 0.5, "repair-all": 1.0}[cfg.revision_policy]
    sets = []
    for i in range(cfg.n_participants):
        pid = f"p{i + 1:03d}"
        for sq in cfg.questions:
            sel_a = noisy_selection(act_probs[sq.question_id])
            sel_b = noisy_selection(sq.u_true)
            sel_c = noisy_selection(sq.pc_true)
            knowledge = KnowledgeLevel(int(rng.integers(1, 6)))
            sel_d = _revised_selection(sel_a, sel_b, sel_c, repair_fraction, rng)
            sets.append(
                JudgmentSet(
                    participant_id=pid,
                    question_id=sq.question_id,
                    pA=interval_from_selection(sel_a),
                    pB=interval_from_selection(sel_b),
                    pC=interval_from_selection(sel_c),
                    pD=interval_from_selection(sel_d),
                    knowledge=knowledge,
                )
            )
    return questions, sets


def _revised_selection(sel_a: int, sel_b: int, sel_c: int, repair_fraction: float, rng) -> int:
    """Task-D selection: keep the initial answer unless repair triggers."""
    if repair_fraction == 0.0:
        return sel_a
    gap = sel_c - sel_b
    inconsistent = (gap > 0 and sel_a <= 50) or (gap < 0 and sel_a >= 50)
    if not inconsistent or rng.random() >= repair_fraction:
        return sel_a
    reflected = 100 - sel_a
    if gap > 0:
        return reflected if reflected > 50 else 60
    return reflected if reflected < 50 else 40


def demo_questions() -> list[SimQuestion]:
    """Small mixed slate covering the three question domains."""
    return [
        SimQuestion("q-politics", u_true=0.6, pc_true=0.3, domain_tag="politics",
                    text="Will the incumbent call elections within 30 days?"),
        SimQuestion("q-products", u_true=0.3, pc_true=0.7, domain_tag="products",
                    text="Will the company announce the rumored product within 30 days?"),
        SimQuestion("q-sports", u_true=0.4, pc_true=0.5, domain_tag="sports",
                    text="Will the player enter the surface-switch tournament within 30 days?"),
    ]
