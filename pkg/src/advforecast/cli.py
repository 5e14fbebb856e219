"""Command-line entry points.

Verbs: ingest (validate a judgments CSV), analyze (full report bundle),
simulate (synthetic dataset), surface (recomposition grid for one
sigma2), serve (HTTP session service). Exit codes: 0 success, 2 input
validation failure, 3 runtime or convergence failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from advforecast.errors import (
    AggregationError,
    DegenerateSampleError,
    FitConvergenceError,
    IngestError,
    ValidationError,
)
from advforecast.pipeline import (
    AnalyzeConfig,
    Dataset,
    RULE_ORDER,
    analyze,
    export_judgments_csv,
    export_outcomes_csv,
    export_questions_csv,
    ingest,
    load_questions,
)
from advforecast.recompose import (
    DEFAULT_SIGMA_MAP,
    RecompositionRule,
    SigmaMap,
    ara_surface,
    surface_to_csv,
)
from advforecast.simulate import SimQuestion, SimulationConfig, demo_questions, simulate


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (IngestError, ValidationError, AggregationError) as exc:
        _fail(2, str(exc))
    except (FitConvergenceError, DegenerateSampleError, RuntimeError) as exc:
        _fail(3, str(exc))


def _load_sigma_map(sigma_map_path: str | None) -> SigmaMap:
    if sigma_map_path is None:
        return DEFAULT_SIGMA_MAP
    with open(sigma_map_path) as fh:
        return SigmaMap.from_dict(json.load(fh))


def _resolve_rules(rules: tuple[str, ...]) -> tuple[str, ...]:
    if not rules:
        return RULE_ORDER
    resolved = []
    for r in rules:
        tag = r.upper()
        if tag not in RULE_ORDER:
            raise ValidationError(f"unknown rule {r!r}; choose from eum, ara, aru, mnl")
        if tag not in resolved:
            resolved.append(tag)
    return tuple(resolved)


@click.group()
def main() -> None:
    """Forecast an adversary's action from decomposed judgments."""


@main.command("ingest")
@click.argument("judgments", type=click.Path(exists=True, dir_okay=False))
@click.option("--questions", "questions_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--outcomes", "outcomes_path", type=click.Path(exists=True, dir_okay=False))
def ingest_cmd(judgments: str, questions_path: str | None, outcomes_path: str | None) -> None:
    """Validate a judgments CSV and report what it contains."""
    ds: Dataset = _guarded(ingest, judgments, questions_path, outcomes_path)
    participants = {js.participant_id for js in ds.sets}
    click.echo(
        f"ok: {len(ds.sets)} judgment sets, {len(participants)} participants, "
        f"{len(ds.questions)} questions, {len(ds.outcomes)} outcomes "
        f"(sha256 {ds.provenance['sha256'][:12]})"
    )


@main.command("analyze")
@click.argument("judgments", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--questions", "questions_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--outcomes", "outcomes_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--rule", "rules", multiple=True, help="Restrict recompositions (repeatable).")
@click.option("--sigma2", "ara_sigma2", type=float, default=None,
              help="Fixed sigma2 for the ARA rule; overrides the knowledge map.")
@click.option("--sigma-map", "sigma_map_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON file mapping knowledge levels 1..5 to sigma2.")
@click.option("--mc-samples", default=10_000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--tie-policy", type=click.Choice(["consistent", "separate"]), default="consistent",
              show_default=True)
@click.option("--mass", default=0.9, show_default=True, help="Interval probability mass for beta fits.")
@click.option("--figures/--no-figures", default=True, show_default=True)
def analyze_cmd(
    judgments: str,
    out_dir: str,
    questions_path: str | None,
    outcomes_path: str | None,
    rules: tuple[str, ...],
    ara_sigma2: float | None,
    sigma_map_path: str | None,
    mc_samples: int,
    seed: int,
    tie_policy: str,
    mass: float,
    figures: bool,
) -> None:
    """Run consistency, scoring, inference and aggregation stages."""

    def run() -> Path:
        ds = ingest(judgments, questions_path, outcomes_path)
        config = AnalyzeConfig(
            rules=_resolve_rules(rules),
            sigma_map=_load_sigma_map(sigma_map_path),
            ara_sigma2=ara_sigma2,
            n_mc=mc_samples,
            seed=seed,
            tie_policy=tie_policy,
            interval_mass=mass,
            figures=figures,
        )
        return analyze(ds, config, out_dir)

    run_dir: Path = _guarded(run)
    click.echo(f"report bundle: {run_dir}")


@main.command("simulate")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--participants", default=96, show_default=True)
@click.option("--questions-file", type=click.Path(exists=True, dir_okay=False),
              help="JSON list of {question_id, u_true, pc_true, text?, domain_tag?}.")
@click.option("--adversary-rule", default="eum", show_default=True)
@click.option("--sigma2", default=None, type=float, help="sigma2 when the adversary rule is ara.")
@click.option("--noise-width", default=0.2, show_default=True)
@click.option("--revision-policy", type=click.Choice(["none", "repair-half", "repair-all"]),
              default="none", show_default=True)
@click.option("--seed", default=0, show_default=True)
def simulate_cmd(
    out_dir: str,
    participants: int,
    questions_file: str | None,
    adversary_rule: str,
    sigma2: float | None,
    noise_width: float,
    revision_policy: str,
    seed: int,
) -> None:
    """Write a synthetic judgments/questions/outcomes CSV triple."""

    def run() -> Path:
        if questions_file is None:
            sim_questions = demo_questions()
        else:
            with open(questions_file) as fh:
                sim_questions = [
                    SimQuestion(
                        question_id=q["question_id"],
                        u_true=q["u_true"],
                        pc_true=q["pc_true"],
                        text=q.get("text", ""),
                        domain_tag=q.get("domain_tag", "other"),
                    )
                    for q in json.load(fh)
                ]
        tag = adversary_rule.upper()
        rule = RecompositionRule(tag, sigma2 if tag == "ARA" else None)
        cfg = SimulationConfig(
            n_participants=participants,
            questions=sim_questions,
            adversary_rule=rule,
            noise_width=noise_width,
            revision_policy=revision_policy,
            seed=seed,
        )
        questions, sets = simulate(cfg)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "judgments.csv").write_text(export_judgments_csv(sets))
        (out / "questions.csv").write_text(export_questions_csv(questions))
        (out / "outcomes.csv").write_text(export_outcomes_csv(questions))
        return out

    out: Path = _guarded(run)
    click.echo(f"synthetic dataset: {out}/judgments.csv, questions.csv, outcomes.csv")


@main.command("surface")
@click.option("--sigma2", required=True, type=float)
@click.option("--grid-step", default=0.05, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
def surface_cmd(sigma2: float, grid_step: float, out_dir: str, figures: bool) -> None:
    """Emit the recomposition surface grid for one sigma2."""

    def run() -> Path:
        rows = ara_surface(sigma2, grid_step)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"surface_sigma2_{sigma2:g}".replace(".", "_")
        (out / f"{stem}.csv").write_text(surface_to_csv(rows))
        if figures:
            from advforecast.figures import surface_png

            (out / f"{stem}.png").write_bytes(surface_png(rows, sigma2))
        return out

    out: Path = _guarded(run)
    click.echo(f"surface written under {out}")


@main.command("serve")
@click.option("--questions", "questions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--data-dir", required=True, type=click.Path(file_okay=False))
@click.option("--sigma-map", "sigma_map_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(questions_path: str, data_dir: str, sigma_map_path: str | None,
              host: str, port: int) -> None:
    """Run the live elicitation HTTP service."""
    import uvicorn

    from advforecast.service import ElicitationService, create_app

    def run():
        questions = load_questions(questions_path)
        service = ElicitationService(questions, data_dir, sigma_map=_load_sigma_map(sigma_map_path))
        return create_app(service)

    app = _guarded(run)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
