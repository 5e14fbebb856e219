"""Consistency checks between direct and decomposed judgments.

A direct judgment p_A is consistent with the decomposed pair (p_B, p_C)
when it sides with 1/2 the same way p_C sides with p_B: someone who
believes the adversary's success probability clears his acting threshold
should also judge the act more likely than not. Classification uses
interval midpoints; exact ties (p_A = 1/2 or p_B = p_C) form a separate
Borderline category whose aggregate treatment is a configurable policy.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from advforecast.errors import ValidationError
from advforecast.judgments import JudgmentSet

QUADRANTS = ("C-low", "C-high", "I-low", "I-high", "Borderline")

# Tie policies: "consistent" folds Borderline into the consistent side of
# aggregates; "separate" keeps it out of both sides.
TIE_POLICIES = ("consistent", "separate")


@dataclass(frozen=True)
class ConsistencyVerdict:
    quadrant: str
    consistent: Optional[bool]

    def counts_consistent(self, tie_policy: str = "consistent") -> bool:
        if self.consistent is not None:
            return self.consistent
        _check_policy(tie_policy)
        return tie_policy == "consistent"

    def counts_inconsistent(self, tie_policy: str = "consistent") -> bool:
        if self.consistent is not None:
            return not self.consistent
        _check_policy(tie_policy)
        return False


@dataclass(frozen=True)
class RevisionOutcome:
    changed: bool
    transition: str  # stayed-consistent | stayed-inconsistent | repaired | broken | borderline-involved


def classify(js: JudgmentSet, use_revised: bool = False) -> ConsistencyVerdict:
    """Quadrant of one judgment set, from interval midpoints.

    use_revised selects the task-D response (p_D) instead of p_A.
    """
    direct = js.pD.midpoint if use_revised else js.pA.midpoint
    gap = js.pC.midpoint - js.pB.midpoint
    if direct == 0.5 or gap == 0.0:
        return ConsistencyVerdict(quadrant="Borderline", consistent=None)
    if gap > 0:
        if direct > 0.5:
            return ConsistencyVerdict(quadrant="C-high", consistent=True)
        return ConsistencyVerdict(quadrant="I-low", consistent=False)
    if direct < 0.5:
        return ConsistencyVerdict(quadrant="C-low", consistent=True)
    return ConsistencyVerdict(quadrant="I-high", consistent=False)


def quadrant_matrix(sets: Sequence[JudgmentSet], use_revised: bool = False) -> dict[str, float]:
    """Quadrant proportions over a population (sums to 1)."""
    if not sets:
        raise ValidationError("no judgment sets given")
    counts = Counter(classify(js, use_revised).quadrant for js in sets)
    n = len(sets)
    return {q: counts.get(q, 0) / n for q in QUADRANTS}


def inconsistency_histogram(
    sets: Sequence[JudgmentSet], tie_policy: str = "consistent"
) -> dict[int, int]:
    """Participants bucketed by their number of inconsistent questions.

    Requires every participant to have answered the same number of
    questions; Borderline verdicts count per the tie policy.
    """
    _check_policy(tie_policy)
    by_participant: dict[str, list[JudgmentSet]] = defaultdict(list)
    for js in sets:
        by_participant[js.participant_id].append(js)
    sizes = {len(group) for group in by_participant.values()}
    if len(sizes) > 1:
        raise ValidationError(f"ragged grouping: question counts per participant {sorted(sizes)}")
    n_questions = sizes.pop() if sizes else 0
    histogram = {k: 0 for k in range(n_questions + 1)}
    for group in by_participant.values():
        bad = sum(classify(js).counts_inconsistent(tie_policy) for js in group)
        histogram[bad] += 1
    return histogram


def revision_outcome(js: JudgmentSet, tie_policy: str = "consistent") -> RevisionOutcome:
    changed = js.pA.selection != js.pD.selection
    before = classify(js, use_revised=False)
    after = classify(js, use_revised=True)
    if before.consistent is None or after.consistent is None:
        transition = "borderline-involved"
    elif before.consistent and after.consistent:
        transition = "stayed-consistent"
    elif not before.consistent and not after.consistent:
        transition = "stayed-inconsistent"
    elif not before.consistent:
        transition = "repaired"
    else:
        transition = "broken"
    return RevisionOutcome(changed=changed, transition=transition)


@dataclass(frozen=True)
class RevisionSummary:
    """Population fractions; denominators documented per field.

    fraction_changed: over all sets. fraction_repaired: over initially
    inconsistent sets. fraction_broken: over initially consistent sets.
    A missing denominator yields None, never zero.
    """

    n_sets: int
    n_changed: int
    n_initially_inconsistent: int
    n_initially_consistent: int
    fraction_changed: Optional[float]
    fraction_repaired_among_inconsistent: Optional[float]
    fraction_broken_among_consistent: Optional[float]

    def to_dict(self) -> dict:
        return {
            "n_sets": self.n_sets,
            "n_changed": self.n_changed,
            "n_initially_inconsistent": self.n_initially_inconsistent,
            "n_initially_consistent": self.n_initially_consistent,
            "fraction_changed": self.fraction_changed,
            "fraction_repaired_among_inconsistent": self.fraction_repaired_among_inconsistent,
            "fraction_broken_among_consistent": self.fraction_broken_among_consistent,
        }


def revision_analysis(
    sets: Sequence[JudgmentSet], tie_policy: str = "consistent"
) -> RevisionSummary:
    """How revisions moved judgments across the consistency boundary."""
    _check_policy(tie_policy)
    n = len(sets)
    n_changed = 0
    n_inconsistent = 0
    n_consistent = 0
    n_repaired = 0
    n_broken = 0
    for js in sets:
        before = classify(js, use_revised=False)
        after = classify(js, use_revised=True)
        if js.pA.selection != js.pD.selection:
            n_changed += 1
        if before.counts_inconsistent(tie_policy):
            n_inconsistent += 1
            if after.counts_consistent(tie_policy):
                n_repaired += 1
        else:
            n_consistent += 1
            if after.counts_inconsistent(tie_policy):
                n_broken += 1
    return RevisionSummary(
        n_sets=n,
        n_changed=n_changed,
        n_initially_inconsistent=n_inconsistent,
        n_initially_consistent=n_consistent,
        fraction_changed=(n_changed / n) if n else None,
        fraction_repaired_among_inconsistent=(n_repaired / n_inconsistent) if n_inconsistent else None,
        fraction_broken_among_consistent=(n_broken / n_consistent) if n_consistent else None,
    )


def scatter_rows(
    sets: Iterable[JudgmentSet], use_revised: bool = False
) -> list[tuple[str, str, float, float]]:
    """(participant, question, p_C - p_B, direct midpoint) rows for plots."""
    rows = []
    for js in sets:
        direct = js.pD.midpoint if use_revised else js.pA.midpoint
        gap = js.pC.midpoint - js.pB.midpoint
        rows.append((js.participant_id, js.question_id, float(gap), float(direct)))
    return rows


def _check_policy(tie_policy: str) -> None:
    if tie_policy not in TIE_POLICIES:
        raise ValidationError(f"tie policy {tie_policy!r} not in {TIE_POLICIES}")
