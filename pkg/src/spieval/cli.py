"""Command-line interface: one verb per engine operation, one project file per run.

Global flags: --project (file path), --as-of (query date), --format
(text / delimited / structured), --actor (audit attribution).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any

import click

from .core import (
    EvaluationViewpoint,
    MeasurementLevel,
    rational_str,
    to_fraction,
)
from .errors import RevisionConflictError, SpiEvalError
from .holistic import KiviatSeries, kiviat_delimited
from .measures import render_goal_statement
from .store import ProjectStore, ingest_observations, parse_observation_file


@dataclass
class CliContext:
    project: Path
    as_of: date
    output_format: str
    actor: str

    _store: ProjectStore | None = None

    def load(self) -> ProjectStore:
        if self._store is None:
            self._store = ProjectStore.load(self.project)
        return self._store

    def save(self, store: ProjectStore) -> None:
        store.save(self.project)


def _parse_date(value: str, label: str = "date") -> date:
    try:
        return date.fromisoformat(value)
    except ValueError:
        raise click.BadParameter(f"{label} must be an ISO 8601 date, got {value!r}")


def emit(
    ctx: CliContext,
    data: Any,
    text_lines: list[str],
    delimited_lines: list[str] | None = None,
) -> None:
    """Render one command result in the requested global format."""
    if ctx.output_format == "structured":
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    elif ctx.output_format == "delimited":
        for line in delimited_lines if delimited_lines is not None else text_lines:
            click.echo(line)
    else:
        for line in text_lines:
            click.echo(line)


def _fail(message: str, code: int = 1) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(code)


@click.group()
@click.option(
    "--project",
    type=click.Path(path_type=Path),
    default=Path("project.json"),
    show_default=True,
    help="Project file.",
)
@click.option("--as-of", "as_of", default=None, help="Query date (ISO 8601); defaults to today.")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["text", "delimited", "structured"]),
    default="text",
    show_default=True,
)
@click.option("--actor", default="cli", show_default=True, help="Actor recorded in the audit log.")
@click.pass_context
def main(ctx: click.Context, project: Path, as_of: str | None, output_format: str, actor: str):
    """Evaluation engine for software process improvement initiatives."""
    ctx.obj = CliContext(
        project=project,
        as_of=_parse_date(as_of, "--as-of") if as_of else date.today(),
        output_format=output_format,
        actor=actor,
    )


def _run(ctx: CliContext, fn):
    try:
        return fn()
    except RevisionConflictError as exc:
        raise _fail(str(exc), code=3)
    except SpiEvalError as exc:
        raise _fail(str(exc))


@main.command()
@click.option(
    "--seed",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="JSON seed: initiative, entities, roles, metrics, timings.",
)
@click.option("--force", is_flag=True, help="Overwrite an existing project file.")
@click.pass_obj
def init(ctx: CliContext, seed: Path, force: bool):
    """Create a new project from a seed definition file."""
    if ctx.project.exists() and not force:
        raise _fail(f"project file {ctx.project} already exists (use --force)")
    payload = json.loads(seed.read_text(encoding="utf-8"))
    store = ProjectStore()
    result = _run(ctx, lambda: store.apply("init", payload, actor=ctx.actor))
    ctx.save(store)
    issues = result.get("validation", [])
    lines = [f"initialized project {result['initiative']} at {ctx.project}"]
    lines += [f"context warning: {i}" for i in issues]
    emit(ctx, {"project": str(ctx.project), **result}, lines)


@main.command()
@click.pass_obj
def validate(ctx: CliContext):
    """Report missing or inconsistent initiative context fields."""
    store = _run(ctx, ctx.load)
    issues = store.validation_report()
    lines = issues if issues else ["initiative context is complete"]
    emit(ctx, {"issues": issues}, lines, issues)


@main.command()
@click.option("--levels", required=True, help="Comma-separated scoped levels (e.g. Process,Project).")
@click.option(
    "--assignments",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="JSON list of {level, viewpoint, roles, indicators} rows.",
)
@click.option("--gap-current", default=None, help="accuracy,coverage of the current quality (low|high).")
@click.option("--gap-target", default=None, help="accuracy,coverage of the aspired quality (low|high).")
@click.option("--budget-hint", type=click.Choice(["constrained", "ample"]), default=None)
@click.pass_obj
def scope(
    ctx: CliContext,
    levels: str,
    assignments: Path,
    gap_current: str | None,
    gap_target: str | None,
    budget_hint: str | None,
):
    """Record the gap analysis (optional) and build the scope matrix."""
    store = _run(ctx, ctx.load)
    if gap_current and gap_target:
        _run(
            ctx,
            lambda: store.apply(
                "set-opportunity",
                {
                    "current": gap_current.split(","),
                    "target": gap_target.split(","),
                    "budget_hint": budget_hint,
                },
                actor=ctx.actor,
            ),
        )
    payload = {
        "levels": [lv.strip() for lv in levels.split(",") if lv.strip()],
        "assignments": json.loads(assignments.read_text(encoding="utf-8")),
    }
    result = _run(ctx, lambda: store.apply("set-scope", payload, actor=ctx.actor))
    ctx.save(store)
    cells = result["scope"]["cells"]
    lines = [f"scope set: {len(cells)} cells on levels {', '.join(result['scope']['levels'])}"]
    lines += [f"coverage warning: {w}" for w in result["coverage_warnings"]]
    emit(ctx, result, lines)


@main.command("derive-goals")
@click.option("--object-label", default=None, help="Wording of the object of study in statements.")
@click.pass_obj
def derive_goals(ctx: CliContext, object_label: str | None):
    """Derive measurement goals (one per scope-cell indicator)."""
    store = _run(ctx, ctx.load)
    payload = {"object_label": object_label} if object_label else {}
    result = _run(ctx, lambda: store.apply("derive-goals", payload, actor=ctx.actor))
    ctx.save(store)
    lines = [f"derived {result['count']} measurement goals"]
    delimited = ["goal_id,level,viewpoint,indicator,statement"]
    data_goals = []
    for goal in store.state.goals:
        statement = render_goal_statement(goal)
        lines.append(f"{goal.id}: {statement}")
        delimited.append(
            f"{goal.id},{goal.level.value},{goal.viewpoint.value},{goal.indicator_id},\"{statement}\""
        )
        data_goals.append({"id": goal.id, "statement": statement})
    emit(ctx, {"count": result["count"], "goals": data_goals}, lines, delimited)


@main.command("check-coverage")
@click.option("--strict", is_flag=True, help="Exit non-zero when violations exist.")
@click.pass_obj
def check_coverage(ctx: CliContext, strict: bool):
    """Report scope-coverage gaps and missing complementary indicators."""
    store = _run(ctx, ctx.load)
    coverage = store.coverage_report()
    complementary = store.complementary_report()
    lines = coverage.lines() + complementary.lines()
    if not lines:
        lines = ["coverage is complete: no gaps, all primaries complemented"]
    data = {
        "scope": coverage.lines(),
        "complementary": complementary.lines(),
        "holistic": coverage.holistic,
        "clean": coverage.is_clean and complementary.is_clean,
    }
    emit(ctx, data, lines, coverage.lines() + complementary.lines())
    if strict and not data["clean"]:
        raise click.exceptions.Exit(1)


@main.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@click.option("--lenient", is_flag=True, help="Keep valid rows and let duplicates win last.")
@click.pass_obj
def ingest(ctx: CliContext, file: Path, lenient: bool):
    """Ingest a delimited observation file (metric_id,entity_id,date,value,source)."""
    store = _run(ctx, ctx.load)
    report = _run(
        ctx,
        lambda: ingest_observations(store, file, strict=not lenient, actor=ctx.actor),
    )
    if report.applied:
        ctx.save(store)
    lines = [f"stored {report.stored} observations (applied={report.applied})"]
    lines += [f"line {e['line']}: {e['message']}" for e in report.errors]
    lines += [f"line {w['line']}: warning: {w['message']}" for w in report.warnings]
    emit(
        ctx,
        {
            "stored": report.stored,
            "applied": report.applied,
            "errors": list(report.errors),
            "warnings": list(report.warnings),
        },
        lines,
    )
    if report.errors:
        raise click.exceptions.Exit(1)


@main.command()
@click.option("--metric", "metric_id", required=True)
@click.option("--value", default=None, help="Explicit baseline value (skips observation lookup).")
@click.option("--sources", default=None, help="Observation sources to draw from (comma-separated).")
@click.option("--entities", default=None, help="Restrict to these entity ids (comma-separated).")
@click.option("--until", default=None, help="Use observations up to this date.")
@click.option("--decline", required=True, help="Decline bound (signed, toward better).")
@click.option("--improve", required=True, help="Improve bound (signed, toward better).")
@click.option("--absolute", is_flag=True, help="Bounds are absolute deltas, not relative changes.")
@click.option(
    "--aggregation",
    type=click.Choice(["mean", "median"]),
    default="mean",
    show_default=True,
)
@click.option("--evaluator", default=None, help="Evaluator role id (defaults to the metric's).")
@click.option("--date", "established", required=True, help="Establishment date (ISO 8601).")
@click.pass_obj
def baseline(
    ctx: CliContext,
    metric_id: str,
    value: str | None,
    sources: str | None,
    entities: str | None,
    until: str | None,
    decline: str,
    improve: str,
    absolute: bool,
    aggregation: str,
    evaluator: str | None,
    established: str,
):
    """Establish a new active baseline for a metric."""
    store = _run(ctx, ctx.load)
    payload: dict[str, Any] = {
        "metric_id": metric_id,
        "thresholds": {
            "decline_bound": decline,
            "improve_bound": improve,
            "kind": "absolute" if absolute else "relative",
        },
        "established_at": established,
        "aggregation": aggregation,
    }
    if evaluator:
        payload["evaluator_role"] = evaluator
    if value is not None:
        payload["value"] = value
    else:
        selector: dict[str, Any] = {}
        if sources:
            selector["sources"] = [s.strip() for s in sources.split(",")]
        if entities:
            selector["entity_ids"] = [e.strip() for e in entities.split(",")]
        if until:
            selector["until"] = until
        payload["from_observations"] = selector
    result = _run(ctx, lambda: store.apply("establish-baseline", payload, actor=ctx.actor))
    ctx.save(store)
    lines = [
        f"baseline {result['id']} for {metric_id}: value {result['value']} "
        f"(established {result['established_at']})"
    ]
    emit(ctx, result, lines)


@main.command("plan-schedule")
@click.option("--from", "start", required=True, help="Horizon start (ISO 8601).")
@click.option("--to", "end", required=True, help="Horizon end (ISO 8601).")
@click.option(
    "--entity-start",
    "entity_starts",
    multiple=True,
    help="entity=date introduction override; repeatable.",
)
@click.option(
    "--strategy",
    "strategies",
    multiple=True,
    help="level=strategy override; repeatable.",
)
@click.pass_obj
def plan_schedule_cmd(
    ctx: CliContext, start: str, end: str, entity_starts: tuple[str, ...], strategies: tuple[str, ...]
):
    """Plan periodic evaluation instances under the per-level timings."""
    store = _run(ctx, ctx.load)
    payload: dict[str, Any] = {"from": start, "to": end}
    if entity_starts:
        payload["entity_starts"] = dict(e.split("=", 1) for e in entity_starts)
    if strategies:
        payload["strategies"] = dict(s.split("=", 1) for s in strategies)
    result = _run(ctx, lambda: store.apply("plan-schedule", payload, actor=ctx.actor))
    ctx.save(store)
    lines = [f"planned {len(result['instances'])} evaluation instances"]
    delimited = ["id,date,level,purpose,entities"]
    for inst in result["instances"]:
        lines.append(
            f"{inst['id']}: {inst['scheduled_date']} {inst['level']} "
            f"[{inst['purpose']}] on {', '.join(inst['entity_ids'])}"
        )
        delimited.append(
            f"{inst['id']},{inst['scheduled_date']},{inst['level']},{inst['purpose']},"
            + ";".join(inst["entity_ids"])
        )
    lines += [f"warning: {w}" for w in result["warnings"]]
    emit(ctx, result, lines, delimited)


@main.command()
@click.argument("instance_id")
@click.option(
    "--observations",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="Delimited observation file with the measured values.",
)
@click.option("--date", "executed_on", default=None, help="Execution date (defaults to scheduled).")
@click.option(
    "--thresholds",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="JSON {metric_id: {decline_bound, improve_bound, kind}} for establish-baseline runs.",
)
@click.pass_obj
def execute(
    ctx: CliContext,
    instance_id: str,
    observations: Path,
    executed_on: str | None,
    thresholds: Path | None,
):
    """Execute a planned evaluation instance against observed values."""
    store = _run(ctx, ctx.load)
    rows, parse_errors = parse_observation_file(observations.read_text(encoding="utf-8"))
    if parse_errors:
        for err in parse_errors:
            click.echo(f"line {err['line']}: {err['message']}", err=True)
        raise click.exceptions.Exit(1)
    payload: dict[str, Any] = {
        "instance_id": instance_id,
        "observations": [
            {k: row[k] for k in ("metric_id", "entity_id", "date", "value")} for row in rows
        ],
    }
    if executed_on:
        payload["executed_on"] = executed_on
    if thresholds:
        payload["thresholds"] = json.loads(thresholds.read_text(encoding="utf-8"))
    result = _run(ctx, lambda: store.apply("execute-evaluation", payload, actor=ctx.actor))
    ctx.save(store)
    lines = [f"executed {instance_id} on {result['executed_at']} ({result['purpose']})"]
    delimited = ["metric_id,observed,classification"]
    for row in result["results"]:
        marker = row["classification"] or "baseline-established"
        lines.append(f"  {row['metric_id']}: {row['observed']} -> {marker}")
        delimited.append(f"{row['metric_id']},{row['observed']},{marker}")
    emit(ctx, result, lines, delimited)


@main.command()
@click.option(
    "--ratings",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="JSON list of {metric_id, entity_id, rating, source_instance, rated_at}.",
)
@click.option(
    "--weights",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="JSON list of {viewpoint, level, metric_id, weight}.",
)
@click.option(
    "--guidelines",
    type=click.Path(exists=True, path_type=Path),
    default=None,
    help="Text file with the agreed rating guidelines.",
)
@click.pass_obj
def rate(ctx: CliContext, ratings: Path | None, weights: Path | None, guidelines: Path | None):
    """Enter impact ratings and/or subjective weights for a rating session."""
    if not (ratings or weights or guidelines):
        raise _fail("nothing to do: pass --ratings, --weights, or --guidelines")
    store = _run(ctx, ctx.load)
    stored_ratings = 0
    stored_weights = 0
    if guidelines:
        _run(
            ctx,
            lambda: store.apply(
                "set-rating-guidelines",
                {"text": guidelines.read_text(encoding="utf-8")},
                actor=ctx.actor,
            ),
        )
    if weights:
        rows = json.loads(weights.read_text(encoding="utf-8"))
        result = _run(
            ctx, lambda: store.apply("set-weights", {"weights": rows}, actor=ctx.actor)
        )
        stored_weights = result["count"]
    if ratings:
        rows = json.loads(ratings.read_text(encoding="utf-8"))
        for row in rows:
            _run(ctx, lambda r=row: store.apply("add-rating", r, actor=ctx.actor))
            stored_ratings += 1
    ctx.save(store)
    lines = [f"stored {stored_ratings} ratings, {stored_weights} weights"]
    if guidelines:
        lines.append("rating guidelines updated")
    emit(ctx, {"ratings": stored_ratings, "weights": stored_weights}, lines)


def _svi_payload(result) -> dict[str, Any]:
    return {
        "viewpoint": result.viewpoint.value if result.viewpoint else None,
        "level": result.level.value,
        "entity_id": result.entity_id,
        "value": rational_str(result.value),
        "value_num": float(result.value),
        "validity_coverage": rational_str(result.validity_coverage),
        "stale": result.stale,
        "inputs": [
            {
                "metric_id": i.metric_id,
                "weight": rational_str(i.weight),
                "rating": i.rating,
                "valid": i.valid,
                "reason": i.reason,
            }
            for i in result.inputs
        ],
    }


@main.command()
@click.option("--viewpoint", required=True, type=click.Choice([v.value for v in EvaluationViewpoint]))
@click.option("--level", required=True, type=click.Choice([l.value for l in MeasurementLevel]))
@click.option("--entity", "entity_id", required=True)
@click.option(
    "--what-if",
    "what_if",
    default=None,
    help="Transient weight overrides metric=weight[,metric=weight...]; not persisted.",
)
@click.pass_obj
def svi(ctx: CliContext, viewpoint: str, level: str, entity_id: str, what_if: str | None):
    """Subjective value of improvement for one viewpoint, level, and entity."""
    store = _run(ctx, ctx.load)
    overrides = None
    if what_if:
        overrides = {}
        for pair in what_if.split(","):
            metric_id, _, weight = pair.partition("=")
            overrides[metric_id.strip()] = to_fraction(weight.strip())
    result = _run(
        ctx,
        lambda: store.svi(
            EvaluationViewpoint(viewpoint),
            MeasurementLevel(level),
            entity_id,
            ctx.as_of,
            weight_overrides=overrides,
        ),
    )
    payload = _svi_payload(result)
    lines = [
        f"SVI({viewpoint}, {level}, {entity_id}) at {ctx.as_of.isoformat()} = "
        f"{payload['value']} ({payload['value_num']:g}), coverage {payload['validity_coverage']}"
        + (" [stale]" if result.stale else "")
    ]
    for i in result.inputs:
        status = "ok" if i.valid else f"excluded ({i.reason})"
        lines.append(f"  {i.metric_id}: weight {rational_str(i.weight)}, rating {i.rating}, {status}")
    delimited = ["metric_id,weight,rating,valid"]
    delimited += [
        f"{i.metric_id},{rational_str(i.weight)},{'' if i.rating is None else i.rating},{i.valid}"
        for i in result.inputs
    ]
    emit(ctx, payload, lines, delimited)


@main.command()
@click.option("--level", required=True, type=click.Choice([l.value for l in MeasurementLevel]))
@click.option(
    "--viewpoint",
    default=None,
    type=click.Choice([v.value for v in EvaluationViewpoint]),
    help="Aggregate this viewpoint's scores; default averages all viewpoints.",
)
@click.pass_obj
def asvi(ctx: CliContext, level: str, viewpoint: str | None):
    """Investment-weighted aggregation of entity scores at a level."""
    store = _run(ctx, ctx.load)
    result = _run(
        ctx,
        lambda: store.asvi(
            MeasurementLevel(level),
            ctx.as_of,
            EvaluationViewpoint(viewpoint) if viewpoint else None,
        ),
    )
    payload = {
        "level": result.level.value,
        "viewpoint": result.viewpoint.value if result.viewpoint else None,
        "value": rational_str(result.value),
        "value_num": float(result.value),
        "stale": result.stale,
        "per_entity": [
            {
                "entity_id": t.entity_id,
                "svi": rational_str(t.svi),
                "investment_unit": rational_str(t.investment_unit),
            }
            for t in result.per_entity
        ],
    }
    lines = [
        f"ASVI({level}) at {ctx.as_of.isoformat()} = {payload['value']} "
        f"({payload['value_num']:g})" + (" [stale]" if result.stale else "")
    ]
    for term in result.per_entity:
        lines.append(
            f"  {term.entity_id}: SVI {rational_str(term.svi)}, IU {rational_str(term.investment_unit)}"
        )
    delimited = ["entity_id,svi,investment_unit"]
    delimited += [
        f"{t.entity_id},{rational_str(t.svi)},{rational_str(t.investment_unit)}"
        for t in result.per_entity
    ]
    emit(ctx, payload, lines, delimited)


def _kiviat_payload(series: KiviatSeries) -> dict[str, Any]:
    return {
        "kind": series.kind,
        "context": series.context,
        "as_of": series.as_of.isoformat(),
        "axes": [
            {
                "axis": a.axis,
                "value": None if a.value is None else rational_str(a.value),
                "value_num": None if a.value is None else float(a.value),
                "staleness": a.staleness,
                "coverage": None if a.coverage is None else rational_str(a.coverage),
                "note": a.note,
            }
            for a in series.axes
        ],
    }


@main.command()
@click.option("--level", default=None, type=click.Choice([l.value for l in MeasurementLevel]))
@click.option("--entity", "entity_id", default=None)
@click.option("--levels", default=None, help="Comma-separated levels for the aggregated chart.")
@click.option(
    "--viewpoint",
    default=None,
    type=click.Choice([v.value for v in EvaluationViewpoint]),
    help="Aggregated chart: use this viewpoint instead of the all-viewpoint mean.",
)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write delimited export here.")
@click.pass_obj
def kiviat(
    ctx: CliContext,
    level: str | None,
    entity_id: str | None,
    levels: str | None,
    viewpoint: str | None,
    out: Path | None,
):
    """Radar-chart series: per-level viewpoint chart or cross-level aggregate."""
    store = _run(ctx, ctx.load)
    if level and entity_id:
        series = _run(
            ctx,
            lambda: store.kiviat_viewpoints(MeasurementLevel(level), entity_id, ctx.as_of),
        )
    else:
        selected = (
            [MeasurementLevel(l.strip()) for l in levels.split(",") if l.strip()]
            if levels
            else None
        )
        series = _run(
            ctx,
            lambda: store.kiviat_levels(
                ctx.as_of,
                selected,
                EvaluationViewpoint(viewpoint) if viewpoint else None,
            ),
        )
    export = kiviat_delimited(series)
    if out is not None:
        out.write_text(export, encoding="utf-8")
    payload = _kiviat_payload(series)
    lines = [f"kiviat ({series.kind}) {series.context} at {series.as_of.isoformat()}"]
    for axis in series.axes:
        shown = "absent" if axis.value is None else f"{float(axis.value):g}"
        lines.append(f"  {axis.axis}: {shown} [{axis.staleness}]" + (f" — {axis.note}" if axis.note else ""))
    if out is not None:
        lines.append(f"exported to {out}")
    emit(ctx, payload, lines, export.strip().split("\n"))


@main.command()
@click.argument(
    "kind",
    type=click.Choice(["validation", "coverage", "divergence", "confounding", "audit", "gap"]),
)
@click.option("--level", default=None, type=click.Choice([l.value for l in MeasurementLevel]))
@click.option("--entity", "entity_id", default=None)
@click.option("--threshold", default="2", show_default=True, help="Divergence delta threshold.")
@click.pass_obj
def report(ctx: CliContext, kind: str, level: str | None, entity_id: str | None, threshold: str):
    """Analysis reports over the current project state."""
    store = _run(ctx, ctx.load)
    if kind == "validation":
        issues = store.validation_report()
        emit(ctx, {"issues": issues}, issues or ["initiative context is complete"], issues)
    elif kind == "coverage":
        coverage = store.coverage_report()
        complementary = store.complementary_report()
        lines = coverage.lines() + complementary.lines() or ["coverage is complete"]
        emit(
            ctx,
            {"scope": coverage.lines(), "complementary": complementary.lines()},
            lines,
            lines,
        )
    elif kind == "divergence":
        if not (level and entity_id):
            raise _fail("divergence report needs --level and --entity")
        result = _run(
            ctx,
            lambda: store.divergence(
                MeasurementLevel(level), entity_id, ctx.as_of, to_fraction(threshold)
            ),
        )
        lines = []
        rows = ["viewpoint_a,viewpoint_b,delta,sign_divergence,delta_flag"]
        data = []
        for pair in result.pairs:
            flag = " FLAG" if pair.flagged else ""
            lines.append(
                f"{pair.viewpoint_a.value} vs {pair.viewpoint_b.value}: "
                f"delta {rational_str(pair.delta)}{flag}"
            )
            rows.append(
                f"{pair.viewpoint_a.value},{pair.viewpoint_b.value},"
                f"{rational_str(pair.delta)},{pair.sign_divergence},{pair.delta_flag}"
            )
            data.append(
                {
                    "viewpoint_a": pair.viewpoint_a.value,
                    "viewpoint_b": pair.viewpoint_b.value,
                    "delta": rational_str(pair.delta),
                    "sign_divergence": pair.sign_divergence,
                    "delta_flag": pair.delta_flag,
                }
            )
        if result.is_clean:
            lines.append("no divergence flags")
        emit(ctx, {"level": level, "pairs": data, "clean": result.is_clean}, lines, rows)
    elif kind == "confounding":
        result = store.confounding()
        lines = result.lines() or ["no evaluation instances"]
        emit(
            ctx,
            {
                "entries": [
                    {
                        "instance_id": e.instance_id,
                        "strategy": e.strategy.value,
                        "factors": [r.factor.value for r in e.records],
                        "flagged": e.flagged,
                    }
                    for e in result.entries
                ],
                "flagged": result.flagged_instances(),
            },
            lines,
            lines,
        )
    elif kind == "gap":
        opportunity = store.state.opportunity
        if opportunity is None:
            emit(ctx, {"opportunity": None}, ["no gap analysis recorded"])
            return
        steps = " -> ".join(f"({a.value},{c.value})" for a, c in opportunity.path) or "(no change)"
        lines = [f"gap path: {steps}"]
        emit(ctx, {"path": steps, "simultaneous": opportunity.simultaneous}, lines)
    elif kind == "audit":
        entries = store.audit
        lines = [
            f"r{e.revision} {e.timestamp} {e.actor}: {e.operation}" for e in entries
        ] or ["audit log is empty"]
        emit(
            ctx,
            {"revision": store.revision, "entries": [e.to_dict() for e in entries]},
            lines,
            lines,
        )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8421, show_default=True, type=int)
@click.pass_obj
def serve(ctx: CliContext, host: str, port: int):
    """Serve the project over the HTTP API (blocks)."""
    import uvicorn

    from .api import create_app

    app = create_app(ctx.project)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
