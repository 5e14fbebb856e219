from __future__ import annotations

import pytest

from advforecast.judgments import JudgmentSet, KnowledgeLevel, interval_from_selection


@pytest.fixture
def make_set():
    """Judgment set from percent selections (a, b, c, d) and knowledge."""

    def build(
        pid: str = "p1",
        qid: str = "q1",
        a: int = 50,
        b: int = 30,
        c: int = 60,
        d: int | None = None,
        knowledge: int = 3,
    ) -> JudgmentSet:
        return JudgmentSet(
            participant_id=pid,
            question_id=qid,
            pA=interval_from_selection(a),
            pB=interval_from_selection(b),
            pC=interval_from_selection(c),
            pD=interval_from_selection(a if d is None else d),
            knowledge=KnowledgeLevel(knowledge),
        )

    return build
