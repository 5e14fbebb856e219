"""Domain types for elicited judgments.

A participant answers four tasks per forecasting question, each on a
0..100% scale in steps of 10%, which identifies a probability interval of
width 10% (half width at the scale endpoints):

* task A: direct probability that the adversary acts (initial),
* task B: minimum success probability at which he would act, i.e. his
  status-quo utility,
* task C: his success probability if he acts,
* task D: repeat of task A after reflection,

plus a 1..5 self-assessed domain-knowledge level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Optional

from advforecast.errors import ValidationError

DOMAIN_TAGS = ("politics", "products", "sports", "other")

TASKS = ("A", "B", "C", "D")


class Probability(float):
    """A float constrained to [0, 1]; construction validates the range."""

    def __new__(cls, value: float) -> "Probability":
        v = float(value)
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"probability {v!r} outside [0, 1]")
        return super().__new__(cls, v)


class KnowledgeLevel(int):
    """Self-assessed domain knowledge on a 5-point scale."""

    def __new__(cls, level: int) -> "KnowledgeLevel":
        v = int(level)
        if v != level or not 1 <= v <= 5:
            raise ValidationError(f"knowledge level {level!r} not in 1..5")
        return super().__new__(cls, v)


@dataclass(frozen=True)
class IntervalResponse:
    """A 10%-step selection with the probability interval it implies."""

    selection: int
    interval_lo: Probability
    interval_hi: Probability

    def __post_init__(self) -> None:
        if self.selection % 10 != 0 or not 0 <= self.selection <= 100:
            raise ValidationError(f"selection {self.selection} not a multiple of 10 in [0, 100]")
        lo, hi = _implied_interval(self.selection)
        if abs(self.interval_lo - lo) > 1e-12 or abs(self.interval_hi - hi) > 1e-12:
            raise ValidationError(
                f"interval [{self.interval_lo}, {self.interval_hi}] does not match selection {self.selection}"
            )

    @property
    def midpoint(self) -> Probability:
        return Probability((self.interval_lo + self.interval_hi) / 2.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "selection": self.selection,
            "interval_lo": float(self.interval_lo),
            "interval_hi": float(self.interval_hi),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "IntervalResponse":
        return cls(
            selection=d["selection"],
            interval_lo=Probability(d["interval_lo"]),
            interval_hi=Probability(d["interval_hi"]),
        )


def _implied_interval(selection: int) -> tuple[float, float]:
    center = selection / 100.0
    return max(center - 0.05, 0.0), min(center + 0.05, 1.0)


def interval_from_selection(selection: int) -> IntervalResponse:
    """Build the clamped 10%-width interval around ``selection`` percent.

    Interior selections map to [s/100 - 0.05, s/100 + 0.05]; the endpoint
    selections 0 and 100 map to the half-width intervals [0, 0.05] and
    [0.95, 1] so the implied median stays in the open unit interval.
    """
    if not isinstance(selection, int) or isinstance(selection, bool):
        raise ValidationError(f"selection {selection!r} must be an integer percent")
    if selection % 10 != 0 or not 0 <= selection <= 100:
        raise ValidationError(f"selection {selection} not a multiple of 10 in [0, 100]")
    lo, hi = _implied_interval(selection)
    return IntervalResponse(selection, Probability(lo), Probability(hi))


def midpoint(interval: IntervalResponse) -> Probability:
    """Arithmetic midpoint of the implied interval."""
    return interval.midpoint


@dataclass(frozen=True)
class JudgmentSet:
    """One participant's four task responses for one question."""

    participant_id: str
    question_id: str
    pA: IntervalResponse
    pB: IntervalResponse
    pC: IntervalResponse
    pD: IntervalResponse
    knowledge: KnowledgeLevel

    def response(self, task: str) -> IntervalResponse:
        if task not in TASKS:
            raise ValidationError(f"unknown task {task!r}, expected one of {TASKS}")
        return getattr(self, f"p{task}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "participant_id": self.participant_id,
            "question_id": self.question_id,
            "pA": self.pA.to_dict(),
            "pB": self.pB.to_dict(),
            "pC": self.pC.to_dict(),
            "pD": self.pD.to_dict(),
            "knowledge": int(self.knowledge),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "JudgmentSet":
        return cls(
            participant_id=d["participant_id"],
            question_id=d["question_id"],
            pA=IntervalResponse.from_dict(d["pA"]),
            pB=IntervalResponse.from_dict(d["pB"]),
            pC=IntervalResponse.from_dict(d["pC"]),
            pD=IntervalResponse.from_dict(d["pD"]),
            knowledge=KnowledgeLevel(d["knowledge"]),
        )


@dataclass(frozen=True)
class Question:
    """A binary forecasting question; outcome is recorded once, later."""

    question_id: str
    text: str
    domain_tag: str = "other"
    horizon_days: int = 30
    outcome: Optional[int] = None

    def __post_init__(self) -> None:
        if self.domain_tag not in DOMAIN_TAGS:
            raise ValidationError(f"domain_tag {self.domain_tag!r} not in {DOMAIN_TAGS}")
        if self.horizon_days <= 0:
            raise ValidationError("horizon_days must be positive")
        if self.outcome is not None and self.outcome not in (0, 1):
            raise ValidationError(f"outcome {self.outcome!r} must be 0 or 1")

    def with_outcome(self, outcome: int) -> "Question":
        """Record the realized outcome; recording twice is rejected."""
        if self.outcome is not None:
            raise ValidationError(f"outcome for {self.question_id} already recorded")
        if outcome not in (0, 1):
            raise ValidationError(f"outcome {outcome!r} must be 0 or 1")
        return replace(self, outcome=outcome)

    def to_dict(self) -> dict[str, Any]:
        return {
            "question_id": self.question_id,
            "text": self.text,
            "domain_tag": self.domain_tag,
            "horizon_days": self.horizon_days,
            "outcome": self.outcome,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Question":
        return cls(
            question_id=d["question_id"],
            text=d.get("text", ""),
            domain_tag=d.get("domain_tag", "other"),
            horizon_days=d.get("horizon_days", 30),
            outcome=d.get("outcome"),
        )
