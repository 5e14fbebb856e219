"""Batch ingestion and the full analysis pipeline.

Judgments arrive as one CSV row per task response:

    participant_id,question_id,task,selection,knowledge

with task in A..D (task A is the initial direct probability, B the
status-quo utility, C the success probability, D the revised direct
probability) and knowledge filled only on task-A rows. Outcomes are a
separate two-column CSV. Reports are written as one directory per run,
named by the hash of the configuration and input, so re-running a given
analysis is byte-for-byte reproducible and never silently overwrites a
different one.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

from advforecast import consistency
from advforecast.aggregation import pool, select_coherent
from advforecast.errors import DegenerateSampleError, IngestError, ValidationError
from advforecast.imprecision import RNG_ALGORITHM, fit_beta
from advforecast.inference import PairedDiffResult, compare_kinds, intervals_csv, reflection_effect
from advforecast.judgments import (
    DOMAIN_TAGS,
    TASKS,
    IntervalResponse,
    JudgmentSet,
    KnowledgeLevel,
    Question,
    interval_from_selection,
)
from advforecast.recompose import DEFAULT_SIGMA_MAP, SigmaMap
from advforecast.scoring import (
    DEFAULT_KNOWLEDGE_TIERS,
    DEFAULT_MC_SAMPLES,
    ScoreRecord,
    cdf_by_group,
    cdf_csv,
    score_set,
    scores_csv,
)

JUDGMENTS_HEADER = "participant_id,question_id,task,selection,knowledge"
OUTCOMES_HEADER = "question_id,outcome"
QUESTIONS_HEADER = "question_id,text,domain_tag,horizon_days"

RULE_ORDER = ("EUM", "ARA", "ARU", "MNL")


@dataclass(frozen=True)
class Dataset:
    questions: list[Question]
    sets: list[JudgmentSet]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = {q.question_id for q in self.questions}
        seen = set()
        for js in self.sets:
            if js.question_id not in known:
                raise ValidationError(f"judgment references unknown question {js.question_id!r}")
            key = (js.participant_id, js.question_id)
            if key in seen:
                raise ValidationError(f"duplicate judgment set for {key}")
            seen.add(key)

    @property
    def outcomes(self) -> dict[str, int]:
        return {q.question_id: q.outcome for q in self.questions if q.outcome is not None}

    def question(self, question_id: str) -> Question:
        for q in self.questions:
            if q.question_id == question_id:
                return q
        raise ValidationError(f"unknown question {question_id!r}")


def ingest(
    judgments_path: Union[str, Path],
    questions_path: Optional[Union[str, Path]] = None,
    outcomes_path: Optional[Union[str, Path]] = None,
) -> Dataset:
    """Read and validate a judgments CSV (plus optional questions/outcomes).

    Every violation is reported with the 1-based file row it came from.
    Questions not described by a questions file are synthesized with
    defaults so referential integrity always holds.
    """
    judgments_path = Path(judgments_path)
    raw = judgments_path.read_bytes()
    sets = parse_judgments_csv(raw.decode("utf-8"))

    questions: dict[str, Question]
    if questions_path is not None:
        questions = {q.question_id: q for q in load_questions(questions_path)}
        for js in sets:
            if js.question_id not in questions:
                raise IngestError(f"judgments reference unknown question {js.question_id!r}")
    else:
        questions = {
            qid: Question(question_id=qid, text="")
            for qid in sorted({js.question_id for js in sets})
        }

    if outcomes_path is not None:
        for qid, outcome in load_outcomes(outcomes_path).items():
            if qid not in questions:
                raise IngestError(f"outcome for unknown question {qid!r}")
            questions[qid] = questions[qid].with_outcome(outcome)

    provenance = {
        "source": judgments_path.name,
        "sha256": hashlib.sha256(raw).hexdigest(),
        "ingested_at": datetime.now(timezone.utc).isoformat(),
    }
    return Dataset(
        questions=[questions[qid] for qid in sorted(questions)],
        sets=sets,
        provenance=provenance,
    )


def parse_judgments_csv(text: str) -> list[JudgmentSet]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty judgments file") from None
    if ",".join(header) != JUDGMENTS_HEADER:
        raise IngestError(
            f"bad header {','.join(header)!r}, expected {JUDGMENTS_HEADER!r}", rows=(1,)
        )

    rows_seen: dict[tuple[str, str, str], int] = {}
    responses: dict[tuple[str, str], dict[str, IntervalResponse]] = {}
    knowledge: dict[tuple[str, str], KnowledgeLevel] = {}
    first_key_row: dict[tuple[str, str], int] = {}

    for row_no, row in enumerate(reader, start=2):
        if not row or row == [""]:
            continue
        if len(row) != 5:
            raise IngestError(f"row {row_no}: expected 5 fields, got {len(row)}", rows=(row_no,))
        pid, qid, task, selection_s, knowledge_s = (f.strip() for f in row)
        if not pid or not qid:
            raise IngestError(f"row {row_no}: empty identifier", rows=(row_no,))
        if task not in TASKS:
            raise IngestError(f"row {row_no}: task {task!r} not in {TASKS}", rows=(row_no,))
        dup_key = (pid, qid, task)
        if dup_key in rows_seen:
            raise IngestError(
                f"duplicate response for participant {pid!r} question {qid!r} task {task}: "
                f"rows {rows_seen[dup_key]} and {row_no}",
                rows=(rows_seen[dup_key], row_no),
            )
        rows_seen[dup_key] = row_no
        try:
            selection = int(selection_s)
        except ValueError:
            raise IngestError(f"row {row_no}: selection {selection_s!r} is not an integer", rows=(row_no,)) from None
        try:
            interval = interval_from_selection(selection)
        except ValidationError as exc:
            raise IngestError(f"row {row_no}: {exc}", rows=(row_no,)) from None

        if task == "A":
            if not knowledge_s:
                raise IngestError(f"row {row_no}: knowledge required on task A rows", rows=(row_no,))
            try:
                knowledge[(pid, qid)] = KnowledgeLevel(int(knowledge_s))
            except (ValueError, ValidationError):
                raise IngestError(
                    f"row {row_no}: knowledge {knowledge_s!r} not an integer in 1..5", rows=(row_no,)
                ) from None
        elif knowledge_s:
            raise IngestError(
                f"row {row_no}: knowledge must be blank on task {task} rows", rows=(row_no,)
            )
        key = (pid, qid)
        first_key_row.setdefault(key, row_no)
        responses.setdefault(key, {})[task] = interval

    sets = []
    for key in sorted(responses):
        tasks = responses[key]
        missing = [t for t in TASKS if t not in tasks]
        if missing:
            raise IngestError(
                f"participant {key[0]!r} question {key[1]!r} missing task(s) {missing} "
                f"(first row {first_key_row[key]})",
                rows=(first_key_row[key],),
            )
        sets.append(
            JudgmentSet(
                participant_id=key[0],
                question_id=key[1],
                pA=tasks["A"],
                pB=tasks["B"],
                pC=tasks["C"],
                pD=tasks["D"],
                knowledge=knowledge[key],
            )
        )
    return sets


def export_judgments_csv(sets: Sequence[JudgmentSet]) -> str:
    """Inverse of parse_judgments_csv; ingest(export(ds)) round-trips."""
    lines = [JUDGMENTS_HEADER]
    for js in sorted(sets, key=lambda s: (s.participant_id, s.question_id)):
        for task in TASKS:
            know = str(int(js.knowledge)) if task == "A" else ""
            lines.append(
                f"{js.participant_id},{js.question_id},{task},{js.response(task).selection},{know}"
            )
    return "\n".join(lines) + "\n"


def export_outcomes_csv(questions: Sequence[Question]) -> str:
    lines = [OUTCOMES_HEADER]
    for q in sorted(questions, key=lambda q: q.question_id):
        if q.outcome is not None:
            lines.append(f"{q.question_id},{q.outcome}")
    return "\n".join(lines) + "\n"


def export_questions_csv(questions: Sequence[Question]) -> str:
    lines = [QUESTIONS_HEADER]
    for q in sorted(questions, key=lambda q: q.question_id):
        text = q.text.replace('"', '""')
        lines.append(f'{q.question_id},"{text}",{q.domain_tag},{q.horizon_days}')
    return "\n".join(lines) + "\n"


def load_outcomes(path: Union[str, Path]) -> dict[str, int]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != OUTCOMES_HEADER:
            raise IngestError(f"bad outcomes header, expected {OUTCOMES_HEADER!r}", rows=(1,))
        outcomes = {}
        for row_no, row in enumerate(reader, start=2):
            if not row or row == [""]:
                continue
            if len(row) != 2:
                raise IngestError(f"row {row_no}: expected 2 fields", rows=(row_no,))
            qid, value = row[0].strip(), row[1].strip()
            if value not in ("0", "1"):
                raise IngestError(f"row {row_no}: outcome {value!r} must be 0 or 1", rows=(row_no,))
            if qid in outcomes:
                raise IngestError(f"row {row_no}: duplicate outcome for {qid!r}", rows=(row_no,))
            outcomes[qid] = int(value)
    return outcomes


def load_questions(path: Union[str, Path]) -> list[Question]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != QUESTIONS_HEADER:
            raise IngestError(f"bad questions header, expected {QUESTIONS_HEADER!r}", rows=(1,))
        questions = []
        seen = set()
        for row_no, row in enumerate(reader, start=2):
            if not row or row == [""]:
                continue
            if len(row) != 4:
                raise IngestError(f"row {row_no}: expected 4 fields", rows=(row_no,))
            qid, text, tag, horizon = (f.strip() for f in row)
            if qid in seen:
                raise IngestError(f"row {row_no}: duplicate question {qid!r}", rows=(row_no,))
            seen.add(qid)
            if tag not in DOMAIN_TAGS:
                raise IngestError(f"row {row_no}: domain_tag {tag!r} not in {DOMAIN_TAGS}", rows=(row_no,))
            try:
                questions.append(Question(qid, text, tag, int(horizon)))
            except (ValueError, ValidationError) as exc:
                raise IngestError(f"row {row_no}: {exc}", rows=(row_no,)) from None
    return questions


@dataclass(frozen=True)
class AnalyzeConfig:
    rules: tuple[str, ...] = RULE_ORDER
    sigma_map: SigmaMap = DEFAULT_SIGMA_MAP
    # Fixed sigma2 for ARA; overrides the knowledge map when set.
    ara_sigma2: Optional[float] = None
    n_mc: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    tie_policy: str = "consistent"
    level: float = 0.95
    interval_mass: float = 0.9
    cdf_grid_step: float = 0.001
    knowledge_tiers: Mapping[int, str] = field(default_factory=lambda: dict(DEFAULT_KNOWLEDGE_TIERS))
    figures: bool = True

    def resolved_rules(self) -> tuple:
        if self.ara_sigma2 is None:
            return self.rules
        from advforecast.recompose import RecompositionRule

        return tuple(
            RecompositionRule("ARA", self.ara_sigma2) if r == "ARA" else r for r in self.rules
        )

    def to_dict(self) -> dict:
        return {
            "rules": list(self.rules),
            "sigma_map": self.sigma_map.to_dict(),
            "ara_sigma2": self.ara_sigma2,
            "n_mc": self.n_mc,
            "seed": self.seed,
            "tie_policy": self.tie_policy,
            "level": self.level,
            "interval_mass": self.interval_mass,
            "cdf_grid_step": self.cdf_grid_step,
            "knowledge_tiers": {str(k): v for k, v in sorted(self.knowledge_tiers.items())},
            "figures": self.figures,
        }


def config_hash(config: AnalyzeConfig, ds: Dataset) -> str:
    payload = {
        "config": config.to_dict(),
        "source_sha256": ds.provenance.get("sha256", ""),
        "sets": [js.to_dict() for js in sorted(ds.sets, key=lambda s: (s.participant_id, s.question_id))],
        "outcomes": dict(sorted(ds.outcomes.items())),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


class _Bundle:
    """Files of one run: name -> (stage, payload)."""

    def __init__(self) -> None:
        self.entries: dict[str, tuple[str, bytes]] = {}
        self.warnings: list[str] = []

    def add(self, name: str, stage: str, payload: bytes) -> None:
        self.entries[name] = (stage, payload)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def payload(self, name: str) -> bytes:
        return self.entries[name][1]

    def file_list(self) -> list[dict[str, str]]:
        return [{"path": name, "stage": stage} for name, (stage, _) in sorted(self.entries.items())]


def analyze(ds: Dataset, config: AnalyzeConfig, out_root: Union[str, Path]) -> Path:
    """Run all stages and write the report bundle.

    Returns the run directory (out_root/run-<hash>). A second run with
    identical inputs reproduces the directory byte for byte; an existing
    directory with different content is refused rather than overwritten.
    """
    run_dir = Path(out_root) / f"run-{config_hash(config, ds)}"
    sets = sorted(ds.sets, key=lambda s: (s.participant_id, s.question_id))
    if not sets:
        raise ValidationError("dataset has no judgment sets")

    bundle = _Bundle()
    _consistency_stage(sets, config, bundle)
    _imprecision_stage(sets, config, bundle)

    outcomes = ds.outcomes
    records: list[ScoreRecord] = []
    if outcomes:
        unresolved = sorted({js.question_id for js in sets} - outcomes.keys())
        if unresolved:
            bundle.warn(f"scoring restricted to resolved questions; unresolved: {unresolved}")
        records = _scoring_stage(sets, outcomes, config, bundle)
        _inference_stage(records, config, bundle)
        _aggregation_stage(sets, outcomes, config, bundle)
    else:
        bundle.warn("no outcomes recorded; scoring, inference and aggregation skipped")

    if config.figures:
        _figures_stage(sets, records, config, bundle)

    manifest = {
        "config": config.to_dict(),
        "config_hash": run_dir.name.removeprefix("run-"),
        "rng_algorithm": RNG_ALGORITHM,
        "dataset": {
            "source_sha256": ds.provenance.get("sha256", ""),
            "n_sets": len(sets),
            "n_participants": len({js.participant_id for js in sets}),
            "n_questions": len(ds.questions),
            "n_outcomes": len(outcomes),
        },
        "files": bundle.file_list(),
        "warnings": bundle.warnings,
    }
    bundle.add("manifest.json", "manifest", _json_bytes(manifest))

    _write_run_dir(run_dir, {name: payload for name, (_, payload) in bundle.entries.items()})
    return run_dir


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


def _consistency_stage(sets, config: AnalyzeConfig, bundle: _Bundle) -> None:
    matrix_initial = consistency.quadrant_matrix(sets, use_revised=False)
    matrix_revised = consistency.quadrant_matrix(sets, use_revised=True)
    histogram = consistency.inconsistency_histogram(sets, config.tie_policy)
    revision = consistency.revision_analysis(sets, config.tie_policy)

    bundle.add("consistency_quadrants.json", "consistency", _json_bytes({
        "initial": matrix_initial,
        "revised": matrix_revised,
        "tie_policy": config.tie_policy,
    }))
    quad_lines = ["view,quadrant,proportion"]
    for view, matrix in (("initial", matrix_initial), ("revised", matrix_revised)):
        for quadrant in consistency.QUADRANTS:
            quad_lines.append(f"{view},{quadrant},{matrix[quadrant]:.6f}")
    bundle.add("consistency_quadrants.csv", "consistency", ("\n".join(quad_lines) + "\n").encode())

    bundle.add("consistency_histogram.json", "consistency", _json_bytes({
        "counts": {str(k): v for k, v in histogram.items()},
        "proportions": {str(k): v / sum(histogram.values()) for k, v in histogram.items()},
        "tie_policy": config.tie_policy,
    }))
    hist_lines = ["n_inconsistent,n_participants"]
    for k in sorted(histogram):
        hist_lines.append(f"{k},{histogram[k]}")
    bundle.add("consistency_histogram.csv", "consistency", ("\n".join(hist_lines) + "\n").encode())

    for name, use_revised in (("scatter_initial.csv", False), ("scatter_revised.csv", True)):
        rows = consistency.scatter_rows(sets, use_revised)
        lines = ["participant_id,question_id,gap,direct"]
        for pid, qid, gap, direct in rows:
            lines.append(f"{pid},{qid},{gap:.6f},{direct:.6f}")
        bundle.add(name, "consistency", ("\n".join(lines) + "\n").encode())

    bundle.add("revision.json", "consistency", _json_bytes(revision.to_dict()))


def _imprecision_stage(sets, config: AnalyzeConfig, bundle: _Bundle) -> None:
    intervals = {}
    for js in sets:
        for task in TASKS:
            interval = js.response(task)
            intervals[interval.selection] = interval
    fits = [fit_beta(intervals[sel], config.interval_mass).to_dict() for sel in sorted(intervals)]
    bundle.add("fits.json", "imprecision", _json_bytes({
        "interval_mass": config.interval_mass,
        "fits": fits,
    }))


def _scoring_stage(sets, outcomes, config: AnalyzeConfig, bundle: _Bundle) -> list[ScoreRecord]:
    records: list[ScoreRecord] = []
    for js in sets:
        if js.question_id not in outcomes:
            continue
        records.extend(
            score_set(
                js,
                outcomes[js.question_id],
                rules=config.resolved_rules(),
                sigma_map=config.sigma_map,
                n_mc=config.n_mc,
                seed=config.seed,
                interval_mass=config.interval_mass,
            )
        )
    bundle.add("scores.csv", "scoring", scores_csv(records).encode())

    for group_by, prefix in (("knowledge-tier", "cdf_knowledge"), ("question", "cdf_question")):
        groups = cdf_by_group(records, group_by, config.knowledge_tiers)
        if group_by == "knowledge-tier":
            for tier in sorted(set(config.knowledge_tiers.values()) - groups.keys()):
                bundle.warn(f"knowledge tier {tier!r} has no records; CDF omitted")
        for group in sorted(groups):
            name = f"{prefix}_{_slug(group)}.csv"
            bundle.add(name, "scoring", cdf_csv(groups[group], config.cdf_grid_step).encode())
    return records


_COMPARISONS = (
    ("direct-pA", "EUM"),
    ("direct-pA", "ARA"),
    ("direct-pA", "ARU"),
    ("direct-pA", "MNL"),
    ("MNL", "ARU"),
    ("MNL", "ARA"),
    ("ARU", "ARA"),
)


def _inference_stage(records, config: AnalyzeConfig, bundle: _Bundle) -> None:
    direct_kinds = ("direct-pA", "direct-pD")
    results: list[PairedDiffResult] = []
    for kind_a, kind_b in _COMPARISONS:
        if kind_a not in config.rules and kind_a not in direct_kinds:
            continue
        if kind_b not in config.rules and kind_b not in direct_kinds:
            continue
        try:
            results.append(compare_kinds(records, kind_a, kind_b, config.level))
        except DegenerateSampleError as exc:
            bundle.warn(f"comparison {kind_a} vs {kind_b} skipped: {exc}")
    try:
        reflection = reflection_effect(records, config.level)
    except DegenerateSampleError as exc:
        reflection = None
        bundle.warn(f"reflection comparison skipped: {exc}")
    if reflection is None:
        bundle.warn("reflection comparison absent (no usable revised judgments)")
    else:
        results.append(reflection)
    bundle.add("intervals.csv", "inference", intervals_csv(results).encode())
    bundle.add("intervals.json", "inference", _json_bytes([r.to_dict() for r in results]))


def _aggregation_stage(sets, outcomes, config: AnalyzeConfig, bundle: _Bundle) -> None:
    selected = select_coherent(sets, config.tie_policy)
    report: dict = {"selected_participants": selected, "rules": {}}
    if not selected:
        bundle.warn("no fully coherent participants; pooled forecasts absent")
    else:
        for rule in config.resolved_rules():
            tag = rule if isinstance(rule, str) else rule.tag
            pooled, aggregate = pool(sets, selected, rule, config.sigma_map, outcomes)
            report["rules"][tag] = {
                "pooled": [pf.to_dict() for pf in pooled],
                "aggregate_brier": aggregate,
            }
    bundle.add("pooled.json", "aggregation", _json_bytes(report))


def _figures_stage(sets, records, config: AnalyzeConfig, bundle: _Bundle) -> None:
    from advforecast import figures

    for name, use_revised, title in (
        ("figures/scatter_initial.png", False, "Initial direct judgments"),
        ("figures/scatter_revised.png", True, "Revised direct judgments"),
    ):
        rows = consistency.scatter_rows(sets, use_revised)
        bundle.add(name, "figures", figures.scatter_png(rows, title))
    if records:
        for group_by, prefix in (("knowledge-tier", "cdf_knowledge"), ("question", "cdf_question")):
            groups = cdf_by_group(records, group_by, config.knowledge_tiers)
            for group in sorted(groups):
                name = f"figures/{prefix}_{_slug(group)}.png"
                bundle.add(name, "figures", figures.cdf_png(groups[group], f"Brier score CDF: {group}"))
        if "intervals.csv" in bundle.entries:
            bundle.add(
                "figures/intervals.png",
                "figures",
                figures.forest_png_from_csv(
                    bundle.payload("intervals.csv").decode(), "Paired score differences"
                ),
            )


def _slug(value: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "-" for c in value)


def _write_run_dir(run_dir: Path, payloads: dict[str, bytes]) -> None:
    if run_dir.exists():
        existing = {
            str(p.relative_to(run_dir)): p.read_bytes()
            for p in sorted(run_dir.rglob("*"))
            if p.is_file()
        }
        if existing == payloads:
            return
        raise ValidationError(
            f"run directory {run_dir} exists with different content; refusing to overwrite"
        )
    for name, payload in payloads.items():
        target = run_dir / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(payload)
