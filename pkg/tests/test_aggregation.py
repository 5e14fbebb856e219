import math

import pytest

from advforecast.aggregation import PooledForecast, pool, select_coherent
from advforecast.errors import AggregationError
from advforecast.recompose import RecompositionRule, recompose_aru
from advforecast.scoring import brier


class TestSelectCoherent:
    def test_all_consistent_all_selected(self, make_set):
        sets = [
            make_set(pid=p, qid=q, a=70, b=30, c=60)
            for p in ("p1", "p2")
            for q in ("q1", "q2", "q3")
        ]
        assert select_coherent(sets) == ["p1", "p2"]

    def test_single_inconsistency_excludes(self, make_set):
        sets = [
            make_set(pid="p1", qid="q1", a=70, b=30, c=60),
            make_set(pid="p1", qid="q2", a=30, b=30, c=60),  # I-low
            make_set(pid="p1", qid="q3", a=70, b=30, c=60),
            make_set(pid="p2", qid="q1", a=70, b=30, c=60),
            make_set(pid="p2", qid="q2", a=70, b=30, c=60),
            make_set(pid="p2", qid="q3", a=70, b=30, c=60),
        ]
        assert select_coherent(sets) == ["p2"]

    def test_borderline_follows_tie_policy(self, make_set):
        sets = [make_set(pid="p1", a=50, b=30, c=60)]
        assert select_coherent(sets, "consistent") == ["p1"]
        assert select_coherent(sets, "separate") == []

    def test_target_selection_share(self, make_set):
        # 365 of 1000 participants fully coherent, as in the target table.
        sets = []
        for i in range(1000):
            bad = i >= 365
            for q in range(3):
                a = 30 if (bad and q == 0) else 70
                sets.append(make_set(pid=f"p{i:04d}", qid=f"q{q}", a=a, b=30, c=60))
        selected = select_coherent(sets)
        assert len(selected) / 1000 == pytest.approx(0.365)


class TestPool:
    def test_singleton_pool_equals_recomposition(self, make_set):
        js = make_set(pid="p1", b=30, c=60)
        pooled, _ = pool([js], ["p1"], "ARU")
        assert pooled[0].estimate == pytest.approx(recompose_aru(0.30, 0.60))
        assert pooled[0].n_contributors == 1

    def test_two_contributors_average(self, make_set):
        # ARU estimates 0.4 and 0.6 for the two participants.
        a = make_set(pid="p1", b=60, c=40)   # 0.4/(0.4+0.6) = 0.4
        b = make_set(pid="p2", b=40, c=60)   # 0.6/(0.6+0.4) = 0.6
        pooled, _ = pool([a, b], ["p1", "p2"], "ARU")
        assert pooled[0].estimate == pytest.approx(0.5)

    def test_pool_inside_convex_hull(self, make_set):
        sets = [
            make_set(pid=f"p{i}", b=b, c=c)
            for i, (b, c) in enumerate([(20, 80), (40, 50), (60, 30), (10, 90)])
        ]
        pids = [js.participant_id for js in sets]
        for rule in ("EUM", "ARU", "MNL"):
            pooled, _ = pool(sets, pids, rule)
            estimates = [
                float(RecompositionRule(rule).apply(js.pB.midpoint, js.pC.midpoint))
                for js in sets
            ]
            assert min(estimates) <= pooled[0].estimate <= max(estimates)

    def test_adding_matching_contributor_is_noop(self, make_set):
        a = make_set(pid="p1", b=60, c=40)
        b = make_set(pid="p2", b=40, c=60)
        c = make_set(pid="p3", b=50, c=50)  # ARU = 0.5 = current pool
        before, _ = pool([a, b], ["p1", "p2"], "ARU")
        after, _ = pool([a, b, c], ["p1", "p2", "p3"], "ARU")
        assert after[0].estimate == pytest.approx(before[0].estimate)

    def test_aggregate_brier_jensen_bound(self, make_set):
        sets = [
            make_set(pid=f"p{i}", qid="q1", b=b, c=c)
            for i, (b, c) in enumerate([(20, 80), (30, 60), (50, 70)])
        ]
        pids = [js.participant_id for js in sets]
        outcomes = {"q1": 1}
        pooled, aggregate = pool(sets, pids, "MNL", outcomes=outcomes)
        individual = [
            brier(RecompositionRule("MNL").apply(js.pB.midpoint, js.pC.midpoint), 1)
            for js in sets
        ]
        assert aggregate <= sum(individual) / len(individual) + 1e-12

    def test_aggregate_is_mean_over_questions(self, make_set):
        sets = [
            make_set(pid="p1", qid="q1", b=20, c=80),
            make_set(pid="p1", qid="q2", b=80, c=20),
        ]
        outcomes = {"q1": 1, "q2": 0}
        pooled, aggregate = pool(sets, ["p1"], "EUM", outcomes=outcomes)
        assert aggregate == pytest.approx(0.0)

    def test_without_outcomes_aggregate_absent(self, make_set):
        pooled, aggregate = pool([make_set()], ["p1"], "EUM")
        assert aggregate is None
        assert isinstance(pooled[0], PooledForecast)

    def test_empty_selection_rejected(self, make_set):
        with pytest.raises(AggregationError):
            pool([make_set()], [], "EUM")

    def test_monte_carlo_path_close_to_midpoint_path(self, make_set):
        sets = [make_set(pid="p1", b=20, c=80)]
        point, _ = pool(sets, ["p1"], "MNL")
        mc, _ = pool(sets, ["p1"], "MNL", use_monte_carlo=True, n_mc=20000, seed=4)
        assert mc[0].estimate == pytest.approx(point[0].estimate, abs=0.01)

    def test_brute_force_oracle(self, make_set):
        """Recompute the aggregate from raw selections with local formulas."""
        data = [
            ("p1", "q1", 70, 30, 60, 3), ("p1", "q2", 20, 60, 30, 2),
            ("p2", "q1", 80, 20, 70, 4), ("p2", "q2", 30, 70, 20, 1),
            ("p3", "q1", 30, 20, 70, 5), ("p3", "q2", 30, 70, 20, 2),
        ]
        sets = [
            make_set(pid=p, qid=q, a=a, b=b, c=c, knowledge=k)
            for p, q, a, b, c, k in data
        ]
        outcomes = {"q1": 1, "q2": 0}
        selected = select_coherent(sets)
        pooled, aggregate = pool(sets, selected, "MNL", outcomes=outcomes)

        # Oracle: coherent = direct side of 1/2 matches sign(c - b) everywhere.
        coherent = []
        for pid in ("p1", "p2", "p3"):
            rows = [r for r in data if r[0] == pid]
            ok = all(
                ((c > b) and (a > 50)) or ((c < b) and (a < 50))
                for _, _, a, b, c, _ in rows
            )
            if ok:
                coherent.append(pid)
        assert selected == coherent

        def mnl(b, c):
            return 1.0 / (1.0 + math.exp((b - c) / 100.0))

        expected_scores = []
        for qid, outcome in sorted(outcomes.items()):
            rows = [r for r in data if r[0] in coherent and r[1] == qid]
            estimate = sum(mnl(b, c) for _, _, _, b, c, _ in rows) / len(rows)
            expected_scores.append((estimate - outcome) ** 2)
        assert aggregate == pytest.approx(
            sum(expected_scores) / len(expected_scores), abs=1e-12
        )
