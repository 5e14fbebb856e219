import pytest

from advforecast.consistency import (
    QUADRANTS,
    classify,
    inconsistency_histogram,
    quadrant_matrix,
    revision_analysis,
    revision_outcome,
    scatter_rows,
)
from advforecast.errors import ValidationError


class TestClassify:
    def test_consistent_high(self, make_set):
        v = classify(make_set(a=70, b=30, c=60))
        assert v.quadrant == "C-high" and v.consistent is True

    def test_inconsistent_low(self, make_set):
        v = classify(make_set(a=30, b=30, c=60))
        assert v.quadrant == "I-low" and v.consistent is False

    def test_consistent_low(self, make_set):
        v = classify(make_set(a=30, b=60, c=30))
        assert v.quadrant == "C-low" and v.consistent is True

    def test_inconsistent_high(self, make_set):
        v = classify(make_set(a=70, b=60, c=30))
        assert v.quadrant == "I-high" and v.consistent is False

    def test_borderline_on_half(self, make_set):
        v = classify(make_set(a=50, b=30, c=60))
        assert v.quadrant == "Borderline" and v.consistent is None

    def test_borderline_on_equal_components(self, make_set):
        v = classify(make_set(a=70, b=40, c=40))
        assert v.quadrant == "Borderline"

    def test_revised_view_uses_pd(self, make_set):
        js = make_set(a=30, b=30, c=60, d=70)
        assert classify(js, use_revised=False).quadrant == "I-low"
        assert classify(js, use_revised=True).quadrant == "C-high"

    def test_views_differ_only_across_half(self, make_set):
        # Both sides of 1/2: verdicts agree whenever pA and pD share a side.
        js = make_set(a=60, b=30, c=60, d=90)
        assert classify(js, False).quadrant == classify(js, True).quadrant


class TestQuadrantMatrix:
    def test_proportions_sum_to_one(self, make_set):
        sets = [
            make_set(pid=f"p{i}", a=a, b=b, c=c)
            for i, (a, b, c) in enumerate(
                [(70, 30, 60), (30, 30, 60), (30, 60, 30), (70, 60, 30), (50, 30, 60)]
            )
        ]
        matrix = quadrant_matrix(sets)
        assert sum(matrix.values()) == pytest.approx(1.0)
        assert set(matrix) == set(QUADRANTS)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            quadrant_matrix([])


class TestInconsistencyHistogram:
    def test_all_consistent_bucket_zero(self, make_set):
        sets = [make_set(pid="p1", qid=q, a=70, b=30, c=60) for q in ("q1", "q2", "q3")]
        assert inconsistency_histogram(sets) == {0: 1, 1: 0, 2: 0, 3: 0}

    def test_counts_inconsistent_questions(self, make_set):
        sets = [
            make_set(pid="p1", qid="q1", a=30, b=30, c=60),  # I-low
            make_set(pid="p1", qid="q2", a=70, b=30, c=60),  # C-high
            make_set(pid="p1", qid="q3", a=70, b=60, c=30),  # I-high
        ]
        assert inconsistency_histogram(sets)[2] == 1

    def test_borderline_counts_by_policy(self, make_set):
        sets = [make_set(pid="p1", qid=q, a=50, b=30, c=60) for q in ("q1", "q2")]
        assert inconsistency_histogram(sets, "consistent") == {0: 1, 1: 0, 2: 0}
        assert inconsistency_histogram(sets, "separate") == {0: 1, 1: 0, 2: 0}

    def test_ragged_grouping_rejected(self, make_set):
        sets = [
            make_set(pid="p1", qid="q1"),
            make_set(pid="p1", qid="q2"),
            make_set(pid="p2", qid="q1"),
        ]
        with pytest.raises(ValidationError):
            inconsistency_histogram(sets)

    def test_synthetic_population_proportions(self, make_set):
        # Population engineered to the target histogram 36.5/42.7/15.6/5.2%.
        buckets = {0: 365, 1: 427, 2: 156, 3: 52}
        sets = []
        pid = 0
        for bad_count, n_participants in buckets.items():
            for _ in range(n_participants):
                pid += 1
                for q in range(3):
                    if q < bad_count:
                        sets.append(make_set(pid=f"p{pid:04d}", qid=f"q{q}", a=30, b=30, c=60))
                    else:
                        sets.append(make_set(pid=f"p{pid:04d}", qid=f"q{q}", a=70, b=30, c=60))
        histogram = inconsistency_histogram(sets)
        total = sum(histogram.values())
        proportions = {k: v / total for k, v in histogram.items()}
        assert proportions[0] == pytest.approx(0.365)
        assert proportions[1] == pytest.approx(0.427)
        assert proportions[2] == pytest.approx(0.156)
        assert proportions[3] == pytest.approx(0.052)


class TestRevisionOutcome:
    def test_transitions(self, make_set):
        assert revision_outcome(make_set(a=70, b=30, c=60, d=80)).transition == "stayed-consistent"
        assert revision_outcome(make_set(a=30, b=30, c=60, d=40)).transition == "stayed-inconsistent"
        assert revision_outcome(make_set(a=30, b=30, c=60, d=70)).transition == "repaired"
        assert revision_outcome(make_set(a=70, b=30, c=60, d=30)).transition == "broken"
        assert revision_outcome(make_set(a=50, b=30, c=60, d=70)).transition == "borderline-involved"

    def test_changed_flag(self, make_set):
        assert revision_outcome(make_set(a=70, d=70)).changed is False
        assert revision_outcome(make_set(a=70, d=80)).changed is True


class TestRevisionAnalysis:
    def test_no_revisions(self, make_set):
        sets = [make_set(pid=f"p{i}") for i in range(5)]
        summary = revision_analysis(sets)
        assert summary.fraction_changed == 0.0

    def test_single_repair(self, make_set):
        summary = revision_analysis([make_set(a=30, b=30, c=60, d=70)])
        assert summary.fraction_repaired_among_inconsistent == 1.0
        assert summary.fraction_broken_among_consistent is None

    def test_empty_population_yields_absent_fractions(self):
        summary = revision_analysis([])
        assert summary.fraction_changed is None

    def test_engineered_population(self, make_set):
        """30% changed, 12.8% of inconsistent repaired, 3.5% of consistent broken."""
        sets = []
        i = 0

        def add(n, a, b, c, d):
            nonlocal i
            for _ in range(n):
                i += 1
                sets.append(make_set(pid=f"p{i:05d}", a=a, b=b, c=c, d=d))

        add(128, 30, 30, 60, 70)   # inconsistent -> repaired (changed)
        add(237, 30, 30, 60, 40)   # inconsistent, changed, still inconsistent
        add(635, 30, 30, 60, 30)   # inconsistent, unchanged
        add(35, 70, 30, 60, 30)    # consistent -> broken (changed)
        add(200, 70, 30, 60, 80)   # consistent, changed, still consistent
        add(765, 70, 30, 60, 70)   # consistent, unchanged

        summary = revision_analysis(sets)
        assert summary.n_sets == 2000
        assert summary.fraction_changed == pytest.approx(0.30)
        assert summary.fraction_repaired_among_inconsistent == pytest.approx(0.128)
        assert summary.fraction_broken_among_consistent == pytest.approx(0.035)


class TestScatterRows:
    def test_rows_carry_gap_and_direct(self, make_set):
        rows = scatter_rows([make_set(a=70, b=30, c=60)])
        pid, qid, gap, direct = rows[0]
        assert gap == pytest.approx(0.30)
        assert direct == pytest.approx(0.70)

    def test_revised_uses_pd(self, make_set):
        rows = scatter_rows([make_set(a=70, d=20)], use_revised=True)
        assert rows[0][3] == pytest.approx(0.20)
