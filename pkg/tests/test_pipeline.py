import json

import numpy as np
import pytest

from advforecast.errors import IngestError, ValidationError
from advforecast.judgments import Question
from advforecast.pipeline import (
    AnalyzeConfig,
    Dataset,
    analyze,
    export_judgments_csv,
    export_outcomes_csv,
    export_questions_csv,
    ingest,
    load_outcomes,
    load_questions,
    parse_judgments_csv,
)
from advforecast.recompose import RecompositionRule, recompose_ara
from advforecast.simulate import SimQuestion, SimulationConfig, simulate, snap_to_grid

GOOD_CSV = """participant_id,question_id,task,selection,knowledge
p1,q1,A,30,3
p1,q1,B,20,
p1,q1,C,60,
p1,q1,D,40,
p2,q1,A,70,5
p2,q1,B,10,
p2,q1,C,90,
p2,q1,D,70,
"""


class TestParseJudgments:
    def test_well_formed(self):
        sets = parse_judgments_csv(GOOD_CSV)
        assert len(sets) == 2
        assert sets[0].pA.selection == 30
        assert int(sets[0].knowledge) == 3

    def test_bad_header(self):
        with pytest.raises(IngestError) as err:
            parse_judgments_csv("a,b,c\n")
        assert err.value.rows == (1,)

    def test_off_grid_selection_cites_row(self):
        bad = GOOD_CSV.replace("p1,q1,C,60,", "p1,q1,C,35,")
        with pytest.raises(IngestError) as err:
            parse_judgments_csv(bad)
        assert err.value.rows == (4,)
        assert "35" in str(err.value)

    def test_duplicate_names_both_rows(self):
        bad = GOOD_CSV + "p1,q1,A,50,2\n"
        with pytest.raises(IngestError) as err:
            parse_judgments_csv(bad)
        assert err.value.rows == (2, 10)

    def test_knowledge_required_on_task_a(self):
        bad = GOOD_CSV.replace("p1,q1,A,30,3", "p1,q1,A,30,")
        with pytest.raises(IngestError) as err:
            parse_judgments_csv(bad)
        assert err.value.rows == (2,)

    def test_knowledge_forbidden_elsewhere(self):
        bad = GOOD_CSV.replace("p1,q1,B,20,", "p1,q1,B,20,4")
        with pytest.raises(IngestError) as err:
            parse_judgments_csv(bad)
        assert err.value.rows == (3,)

    def test_knowledge_out_of_range(self):
        bad = GOOD_CSV.replace("p1,q1,A,30,3", "p1,q1,A,30,9")
        with pytest.raises(IngestError):
            parse_judgments_csv(bad)

    def test_incomplete_set(self):
        truncated = "\n".join(GOOD_CSV.splitlines()[:4]) + "\n"
        with pytest.raises(IngestError) as err:
            parse_judgments_csv(truncated)
        assert "missing task" in str(err.value)

    def test_unknown_task(self):
        bad = GOOD_CSV.replace("p1,q1,D,40,", "p1,q1,E,40,")
        with pytest.raises(IngestError):
            parse_judgments_csv(bad)


class TestRoundTrip:
    def test_export_then_parse_is_identity(self):
        sets = parse_judgments_csv(GOOD_CSV)
        assert parse_judgments_csv(export_judgments_csv(sets)) == sets

    def test_ingest_export_ingest(self, tmp_path):
        path = tmp_path / "j.csv"
        path.write_text(GOOD_CSV)
        ds = ingest(path)
        exported = tmp_path / "exported.csv"
        exported.write_text(export_judgments_csv(ds.sets))
        assert ingest(exported).sets == ds.sets


class TestAuxiliaryFiles:
    def test_outcomes_round_trip(self, tmp_path):
        questions = [Question("q1", "t").with_outcome(1), Question("q2", "t")]
        path = tmp_path / "o.csv"
        path.write_text(export_outcomes_csv(questions))
        assert load_outcomes(path) == {"q1": 1}

    def test_outcomes_validation(self, tmp_path):
        path = tmp_path / "o.csv"
        path.write_text("question_id,outcome\nq1,2\n")
        with pytest.raises(IngestError):
            load_outcomes(path)

    def test_questions_round_trip(self, tmp_path):
        questions = [Question("q1", 'say "hi", twice', "politics", 30)]
        path = tmp_path / "q.csv"
        path.write_text(export_questions_csv(questions))
        assert load_questions(path) == questions

    def test_ingest_wires_outcomes_and_questions(self, tmp_path):
        (tmp_path / "j.csv").write_text(GOOD_CSV)
        (tmp_path / "q.csv").write_text('question_id,text,domain_tag,horizon_days\nq1,"t",sports,30\n')
        (tmp_path / "o.csv").write_text("question_id,outcome\nq1,1\n")
        ds = ingest(tmp_path / "j.csv", tmp_path / "q.csv", tmp_path / "o.csv")
        assert ds.outcomes == {"q1": 1}
        assert ds.questions[0].domain_tag == "sports"

    def test_unknown_question_reference(self, tmp_path):
        (tmp_path / "j.csv").write_text(GOOD_CSV)
        (tmp_path / "q.csv").write_text('question_id,text,domain_tag,horizon_days\nq9,"t",sports,30\n')
        with pytest.raises(IngestError):
            ingest(tmp_path / "j.csv", tmp_path / "q.csv")


class TestDataset:
    def test_referential_integrity(self, make_set):
        with pytest.raises(ValidationError):
            Dataset(questions=[], sets=[make_set()])

    def test_duplicate_set_rejected(self, make_set):
        with pytest.raises(ValidationError):
            Dataset(questions=[Question("q1", "t")], sets=[make_set(), make_set()])


class TestSnap:
    @pytest.mark.parametrize(
        "value,expected",
        [(0.0, 0), (0.31, 30), (0.35, 40), (1.0, 100), (-0.2, 0), (1.4, 100), (0.04, 0)],
    )
    def test_grid(self, value, expected):
        assert snap_to_grid(value) == expected


class TestSimulate:
    def _config(self, **kw):
        defaults = dict(
            n_participants=4,
            questions=[
                SimQuestion("q1", u_true=0.3, pc_true=0.6),
                SimQuestion("q2", u_true=0.7, pc_true=0.2),
            ],
            adversary_rule=RecompositionRule("EUM"),
            noise_width=0.2,
            revision_policy="none",
            seed=9,
        )
        defaults.update(kw)
        return SimulationConfig(**defaults)

    def test_deterministic(self):
        q1, s1 = simulate(self._config())
        q2, s2 = simulate(self._config())
        assert q1 == q2 and s1 == s2

    def test_zero_noise_eum_acts(self):
        questions, sets = simulate(
            self._config(questions=[SimQuestion("q1", u_true=0.3, pc_true=0.6)], noise_width=0.0)
        )
        assert questions[0].outcome == 1
        for js in sets:
            assert js.pB.selection == 30
            assert js.pC.selection == 60
            assert js.pA.selection == 100  # EUM truth is certain action

    def test_act_frequency_matches_rule(self):
        # Many questions with the same ground truth; empirical act rate
        # should match the closed-form choice probability.
        sigma2 = 10.0
        questions = [SimQuestion(f"q{i}", 0.3, 0.6) for i in range(10_000)]
        cfg = self._config(
            n_participants=1,
            questions=questions,
            adversary_rule=RecompositionRule("ARA", sigma2),
            noise_width=0.0,
        )
        qs, _ = simulate(cfg)
        rate = np.mean([q.outcome for q in qs])
        assert rate == pytest.approx(float(recompose_ara(0.3, 0.6, sigma2)), abs=0.02)

    def test_repair_all_fixes_inconsistencies(self):
        from advforecast.consistency import classify

        cfg = self._config(
            n_participants=50, noise_width=0.8, revision_policy="repair-all", seed=3
        )
        _, sets = simulate(cfg)
        for js in sets:
            after = classify(js, use_revised=True)
            assert after.consistent is not False

    def test_zero_noise_population_is_fully_consistent(self):
        from advforecast.consistency import inconsistency_histogram

        # Clear gaps and no reporting noise: every participant lands in
        # bucket 0 of the inconsistency histogram.
        cfg = self._config(
            n_participants=20,
            questions=[
                SimQuestion("q1", u_true=0.3, pc_true=0.6),
                SimQuestion("q2", u_true=0.8, pc_true=0.2),
            ],
            noise_width=0.0,
        )
        _, sets = simulate(cfg)
        histogram = inconsistency_histogram(sets)
        assert histogram[0] == 20
        assert all(v == 0 for k, v in histogram.items() if k > 0)

    def test_dataset_from_simulation_round_trips(self, tmp_path):
        questions, sets = simulate(self._config())
        (tmp_path / "j.csv").write_text(export_judgments_csv(sets))
        ds = ingest(tmp_path / "j.csv")
        assert ds.sets == sorted(sets, key=lambda s: (s.participant_id, s.question_id))


@pytest.fixture
def small_dataset(tmp_path):
    cfg = SimulationConfig(
        n_participants=6,
        questions=[
            SimQuestion("q1", 0.3, 0.6, domain_tag="politics"),
            SimQuestion("q2", 0.7, 0.3, domain_tag="sports"),
        ],
        adversary_rule=RecompositionRule("EUM"),
        noise_width=0.3,
        revision_policy="repair-half",
        seed=21,
    )
    questions, sets = simulate(cfg)
    j = tmp_path / "j.csv"
    q = tmp_path / "q.csv"
    o = tmp_path / "o.csv"
    j.write_text(export_judgments_csv(sets))
    q.write_text(export_questions_csv(questions))
    o.write_text(export_outcomes_csv(questions))
    return j, q, o


FAST = AnalyzeConfig(n_mc=300, figures=True)


class TestAnalyze:
    def test_without_outcomes_only_consistency(self, small_dataset, tmp_path):
        j, q, _ = small_dataset
        ds = ingest(j, q)
        run_dir = analyze(ds, AnalyzeConfig(n_mc=50, figures=False), tmp_path / "out")
        names = {p.name for p in run_dir.iterdir()}
        assert "consistency_quadrants.json" in names
        assert "manifest.json" in names
        assert "scores.csv" not in names
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert any("no outcomes" in w for w in manifest["warnings"])

    def test_full_bundle(self, small_dataset, tmp_path):
        j, q, o = small_dataset
        ds = ingest(j, q, o)
        run_dir = analyze(ds, FAST, tmp_path / "out")
        names = {str(p.relative_to(run_dir)) for p in run_dir.rglob("*") if p.is_file()}
        for required in (
            "manifest.json",
            "scores.csv",
            "intervals.csv",
            "pooled.json",
            "fits.json",
            "scatter_initial.csv",
            "figures/scatter_initial.png",
        ):
            assert required in names
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["rng_algorithm"] == "philox4x64"
        listed = {entry["path"] for entry in manifest["files"]}
        assert listed == names - {"manifest.json"}

    def test_byte_identical_reruns(self, small_dataset, tmp_path):
        j, q, o = small_dataset
        ds = ingest(j, q, o)
        dir_a = analyze(ds, FAST, tmp_path / "a")
        dir_b = analyze(ds, FAST, tmp_path / "b")
        files_a = sorted(p.relative_to(dir_a) for p in dir_a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(dir_b) for p in dir_b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (dir_a / rel).read_bytes() == (dir_b / rel).read_bytes(), rel

    def test_rerun_into_same_directory_is_idempotent(self, small_dataset, tmp_path):
        j, q, o = small_dataset
        ds = ingest(j, q, o)
        dir_a = analyze(ds, FAST, tmp_path / "out")
        dir_b = analyze(ds, FAST, tmp_path / "out")
        assert dir_a == dir_b

    def test_conflicting_directory_refused(self, small_dataset, tmp_path):
        j, q, o = small_dataset
        ds = ingest(j, q, o)
        run_dir = analyze(ds, FAST, tmp_path / "out")
        (run_dir / "scores.csv").write_text("tampered\n")
        with pytest.raises(ValidationError):
            analyze(ds, FAST, tmp_path / "out")

    def test_fixed_ara_sigma2_overrides_map(self, small_dataset, tmp_path):
        j, q, o = small_dataset
        ds = ingest(j, q, o)
        default = analyze(ds, AnalyzeConfig(n_mc=200, figures=False), tmp_path / "d")
        pinned = analyze(
            ds, AnalyzeConfig(n_mc=200, figures=False, ara_sigma2=10.0), tmp_path / "p"
        )
        score_default = (default / "scores.csv").read_text()
        score_pinned = (pinned / "scores.csv").read_text()
        ara_rows = lambda text: [l for l in text.splitlines() if ",ARA," in l]
        assert ara_rows(score_default) != ara_rows(score_pinned)
        # Non-ARA rows are untouched by the override.
        other_rows = lambda text: [l for l in text.splitlines() if ",ARA," not in l]
        assert other_rows(score_default) == other_rows(score_pinned)
        manifest = json.loads((pinned / "manifest.json").read_text())
        assert manifest["config"]["ara_sigma2"] == 10.0

    def test_partial_outcomes_warns(self, small_dataset, tmp_path):
        j, q, _ = small_dataset
        (j.parent / "partial.csv").write_text("question_id,outcome\nq1,1\n")
        ds = ingest(j, q, j.parent / "partial.csv")
        run_dir = analyze(ds, AnalyzeConfig(n_mc=50, figures=False), tmp_path / "out")
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert any("restricted" in w for w in manifest["warnings"])
        scores = (run_dir / "scores.csv").read_text().splitlines()
        assert all(",q2," not in line for line in scores[1:])
