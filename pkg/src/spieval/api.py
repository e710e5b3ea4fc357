"""HTTP service exposing every engine operation to the UI and to scripts.

Writes carry an ``expected_revision`` (and optional ``actor``) alongside the
operation payload; a stale revision yields 409 with the current revision and
no mutation. Read queries accept an ``as_of`` date for what-if time travel,
and the what-if scoring endpoint never changes the revision.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path
from typing import Any, Mapping

from fastapi import Body, FastAPI, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .core import (
    EvaluationViewpoint,
    MeasurementLevel,
    indicator_catalog,
    rational_str,
    to_fraction,
)
from .errors import (
    DegenerateWeightsError,
    InsufficientViewpointsError,
    LinkageError,
    NoDataError,
    RevisionConflictError,
    SchemaError,
    SpiEvalError,
    UnknownOperationError,
)
from .evaluation import CostRank
from .holistic import KiviatSeries, kiviat_delimited
from .measures import render_goal_statement
from .store import (
    ProjectStore,
    enc_baseline,
    enc_entity,
    enc_goal,
    enc_indicator,
    enc_initiative,
    enc_instance,
    enc_metric,
    enc_opportunity,
    enc_role,
    enc_scope,
    enc_timing,
    enc_weight,
    enc_rating,
    enc_observation,
    enc_confounding,
)

RESERVED_WRITE_KEYS = ("expected_revision", "actor")


def _parse_as_of(raw: str | None) -> date:
    if raw is None:
        return date.today()
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise SchemaError(f"as_of must be an ISO 8601 date, got {raw!r}") from exc


def _svi_json(result) -> dict[str, Any]:
    return {
        "viewpoint": result.viewpoint.value if result.viewpoint else None,
        "level": result.level.value,
        "entity_id": result.entity_id,
        "value": rational_str(result.value),
        "value_num": float(result.value),
        "validity_coverage": rational_str(result.validity_coverage),
        "coverage_num": float(result.validity_coverage),
        "stale": result.stale,
        "computed_at": result.computed_at.isoformat(),
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


def _kiviat_json(series: KiviatSeries) -> dict[str, Any]:
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


def create_app(project_path: str | Path, *, autosave: bool = True) -> FastAPI:
    """Build the service bound to one project file."""
    path = Path(project_path)
    store = ProjectStore.load(path)

    app = FastAPI(title="spieval", version="0.1.0")
    app.state.store = store
    app.state.path = path
    app.state.autosave = autosave

    def write(operation: str, body: Mapping[str, Any]) -> JSONResponse:
        body = dict(body or {})
        expected = body.pop("expected_revision", None)
        actor = str(body.pop("actor", "api"))
        result = store.apply(
            operation,
            body,
            actor=actor,
            expected_revision=int(expected) if expected is not None else None,
        )
        if app.state.autosave:
            store.save(path)
        return JSONResponse({"revision": store.revision, "result": result})

    @app.exception_handler(ValueError)
    async def value_error_handler(_request: Request, exc: ValueError):
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(SpiEvalError)
    async def domain_error_handler(_request: Request, exc: SpiEvalError):
        if isinstance(exc, RevisionConflictError):
            return JSONResponse(
                {"error": str(exc), "current_revision": store.revision}, status_code=409
            )
        if isinstance(exc, (LinkageError, UnknownOperationError)):
            return JSONResponse({"error": str(exc)}, status_code=404)
        if isinstance(
            exc,
            (
                NoDataError,
                DegenerateWeightsError,
                InsufficientViewpointsError,
            ),
        ):
            return JSONResponse({"error": str(exc)}, status_code=422)
        if isinstance(exc, SchemaError):
            return JSONResponse({"error": str(exc)}, status_code=400)
        return JSONResponse({"error": str(exc)}, status_code=422)

    # -- project --------------------------------------------------------------

    @app.get("/revision")
    def get_revision():
        return {"revision": store.revision}

    @app.get("/project")
    def get_project():
        return store.to_document()

    @app.get("/audit")
    def get_audit():
        return {
            "revision": store.revision,
            "entries": [entry.to_dict() for entry in store.audit],
        }

    # -- initiative -----------------------------------------------------------

    @app.get("/initiative")
    def get_initiative():
        initiative = store.state.initiative
        return {
            "initiative": enc_initiative(initiative) if initiative else None,
            "validation": store.validation_report(),
        }

    @app.put("/initiative")
    def put_initiative(body: dict = Body(...)):
        return write("set-initiative", body)

    @app.get("/validation")
    def get_validation():
        return {"issues": store.validation_report()}

    # -- vocabulary -----------------------------------------------------------

    @app.get("/entities")
    def get_entities():
        return {"entities": [enc_entity(e) for e in store.state.entities.values()]}

    @app.post("/entities")
    def post_entity(body: dict = Body(...)):
        return write("add-entity", body)

    @app.get("/roles")
    def get_roles():
        return {"roles": [enc_role(r) for r in store.state.roles.values()]}

    @app.post("/roles")
    def post_role(body: dict = Body(...)):
        return write("add-role", body)

    @app.get("/indicators")
    def get_indicators():
        return {
            "catalog": [enc_indicator(i) for i in indicator_catalog()],
            "custom": [enc_indicator(i) for i in store.state.custom_indicators.values()],
        }

    @app.post("/indicators")
    def post_indicator(body: dict = Body(...)):
        return write("add-indicator", body)

    @app.get("/metrics")
    def get_metrics():
        return {"metrics": [enc_metric(m) for m in store.state.metrics.values()]}

    @app.post("/metrics")
    def post_metric(body: dict = Body(...)):
        return write("add-metric", body)

    @app.get("/timings")
    def get_timings():
        return {"timings": [enc_timing(t) for t in store.state.timings.values()]}

    @app.put("/timings")
    def put_timings(body: dict = Body(...)):
        return write("set-timings", body)

    # -- scoping --------------------------------------------------------------

    @app.get("/opportunity")
    def get_opportunity():
        opportunity = store.state.opportunity
        return {"opportunity": enc_opportunity(opportunity) if opportunity else None}

    @app.put("/opportunity")
    def put_opportunity(body: dict = Body(...)):
        return write("set-opportunity", body)

    @app.get("/scope")
    def get_scope():
        matrix = store.state.scope
        return {"scope": enc_scope(matrix) if matrix else None}

    @app.put("/scope")
    def put_scope(body: dict = Body(...)):
        return write("set-scope", body)

    @app.get("/scope/coverage")
    def get_scope_coverage():
        coverage = store.coverage_report()
        complementary = store.complementary_report()
        return {
            "scope_warnings": coverage.lines(),
            "complementary_violations": complementary.lines(),
            "holistic": coverage.holistic,
            "clean": coverage.is_clean and complementary.is_clean,
        }

    # -- goals ----------------------------------------------------------------

    @app.get("/goals")
    def get_goals():
        return {
            "goals": [
                {**enc_goal(g), "statement": render_goal_statement(g)}
                for g in store.state.goals
            ]
        }

    @app.post("/goals/derive")
    def post_derive(body: dict = Body(default={})):
        return write("derive-goals", body)

    @app.post("/gqm-trees")
    def post_gqm_tree(body: dict = Body(...)):
        return write("attach-gqm-tree", body)

    # -- strategies -----------------------------------------------------------

    @app.get("/strategies")
    def get_strategies(
        levels: str = Query(...),
        budget: str | None = Query(default=None),
        controllable: bool = Query(default=False),
    ):
        parsed = [MeasurementLevel(l.strip()) for l in levels.split(",") if l.strip()]
        choices = store.strategies(
            parsed,
            CostRank(budget) if budget else None,
            require_controllable_confounding=controllable,
        )
        return {
            "strategies": [
                {
                    "strategy": c.strategy.value,
                    "levels": sorted(l.value for l in c.levels),
                    "cost_rank": c.cost_rank.value,
                    "confounding": c.confounding.value,
                    "justification": c.justification,
                }
                for c in choices
            ]
        }

    # -- observations and baselines --------------------------------------------

    @app.get("/observations")
    def get_observations():
        return {"observations": [enc_observation(o) for o in store.state.observations]}

    @app.post("/observations")
    def post_observations(body: dict = Body(...)):
        return write("ingest-observations", body)

    @app.get("/baselines")
    def get_baselines():
        return {"baselines": [enc_baseline(b) for b in store.state.ledger.records()]}

    @app.post("/baselines")
    def post_baseline(body: dict = Body(...)):
        return write("establish-baseline", body)

    @app.get("/baselines/effective")
    def get_effective_baseline(
        metric_id: str = Query(...), as_of: str | None = Query(default=None)
    ):
        baseline = store.effective_baseline(metric_id, _parse_as_of(as_of))
        return {"baseline": enc_baseline(baseline) if baseline else None}

    # -- schedule ---------------------------------------------------------------

    @app.get("/schedule")
    def get_schedule():
        return {"instances": [enc_instance(i) for i in store.state.instances.values()]}

    @app.post("/schedule/plan")
    def post_plan(body: dict = Body(...)):
        return write("plan-schedule", body)

    @app.post("/schedule/instances")
    def post_instance(body: dict = Body(...)):
        return write("add-instance", body)

    @app.post("/schedule/{instance_id}/execute")
    def post_execute(instance_id: str, body: dict = Body(...)):
        payload = dict(body)
        payload["instance_id"] = instance_id
        return write("execute-evaluation", payload)

    @app.get("/schedule/{instance_id}/validity")
    def get_validity(instance_id: str, as_of: str | None = Query(default=None)):
        status = store.instance_validity(instance_id, _parse_as_of(as_of))
        return {"instance_id": instance_id, "validity": status.value}

    # -- ratings and weights -----------------------------------------------------

    @app.get("/weights")
    def get_weights():
        return {"weights": [enc_weight(w) for w in store.state.weights]}

    @app.put("/weights")
    def put_weights(body: dict = Body(...)):
        return write("set-weights", body)

    @app.get("/ratings")
    def get_ratings():
        return {"ratings": [enc_rating(r) for r in store.state.ratings]}

    @app.post("/ratings")
    def post_rating(body: dict = Body(...)):
        return write("add-rating", body)

    @app.get("/rating-guidelines")
    def get_guidelines():
        return {"text": store.state.rating_guidelines}

    @app.put("/rating-guidelines")
    def put_guidelines(body: dict = Body(...)):
        return write("set-rating-guidelines", body)

    # -- confounding --------------------------------------------------------------

    @app.get("/confounding")
    def get_confounding():
        report = store.confounding()
        return {
            "records": [enc_confounding(c) for c in store.state.confounding],
            "entries": [
                {
                    "instance_id": e.instance_id,
                    "strategy": e.strategy.value,
                    "factors": [r.factor.value for r in e.records],
                    "flagged": e.flagged,
                    "note": e.note,
                }
                for e in report.entries
            ],
        }

    @app.post("/confounding")
    def post_confounding(body: dict = Body(...)):
        return write("add-confounding", body)

    # -- holistic queries -----------------------------------------------------------

    @app.get("/svi")
    def get_svi(
        viewpoint: str = Query(...),
        level: str = Query(...),
        entity_id: str = Query(...),
        as_of: str | None = Query(default=None),
    ):
        result = store.svi(
            EvaluationViewpoint(viewpoint),
            MeasurementLevel(level),
            entity_id,
            _parse_as_of(as_of),
        )
        return _svi_json(result)

    @app.post("/svi/what-if")
    def post_what_if(body: dict = Body(...)):
        """Transient scoring with weight overrides; never persists or bumps
        the revision."""
        viewpoint = EvaluationViewpoint(body["viewpoint"])
        level = MeasurementLevel(body["level"])
        entity_id = str(body["entity_id"])
        as_of = _parse_as_of(body.get("as_of"))
        overrides = {
            str(metric_id): to_fraction(weight)
            for metric_id, weight in dict(body.get("weights", {})).items()
        }
        result = store.svi(viewpoint, level, entity_id, as_of, weight_overrides=overrides)
        return {"revision": store.revision, "svi": _svi_json(result), "transient": True}

    @app.get("/asvi")
    def get_asvi(
        level: str = Query(...),
        viewpoint: str | None = Query(default=None),
        as_of: str | None = Query(default=None),
    ):
        result = store.asvi(
            MeasurementLevel(level),
            _parse_as_of(as_of),
            EvaluationViewpoint(viewpoint) if viewpoint else None,
        )
        return {
            "level": result.level.value,
            "viewpoint": result.viewpoint.value if result.viewpoint else None,
            "value": rational_str(result.value),
            "value_num": float(result.value),
            "stale": result.stale,
            "computed_at": result.computed_at.isoformat(),
            "per_entity": [
                {
                    "entity_id": t.entity_id,
                    "svi": rational_str(t.svi),
                    "svi_num": float(t.svi),
                    "investment_unit": rational_str(t.investment_unit),
                }
                for t in result.per_entity
            ],
        }

    @app.get("/kiviat")
    def get_kiviat(
        kind: str = Query(default="viewpoints"),
        level: str | None = Query(default=None),
        entity_id: str | None = Query(default=None),
        levels: str | None = Query(default=None),
        viewpoint: str | None = Query(default=None),
        as_of: str | None = Query(default=None),
        format: str = Query(default="json"),
    ):
        when = _parse_as_of(as_of)
        if kind == "viewpoints":
            if not (level and entity_id):
                raise SchemaError("viewpoints chart needs level and entity_id")
            series = store.kiviat_viewpoints(MeasurementLevel(level), entity_id, when)
        elif kind == "levels":
            selected = (
                [MeasurementLevel(l.strip()) for l in levels.split(",") if l.strip()]
                if levels
                else None
            )
            series = store.kiviat_levels(
                when, selected, EvaluationViewpoint(viewpoint) if viewpoint else None
            )
        else:
            raise SchemaError(f"unknown chart kind {kind!r} (viewpoints or levels)")
        if format == "csv":
            return PlainTextResponse(kiviat_delimited(series), media_type="text/csv")
        return _kiviat_json(series)

    @app.get("/reports/divergence")
    def get_divergence(
        level: str = Query(...),
        entity_id: str = Query(...),
        as_of: str | None = Query(default=None),
        threshold: str = Query(default="2"),
    ):
        result = store.divergence(
            MeasurementLevel(level),
            entity_id,
            _parse_as_of(as_of),
            to_fraction(threshold),
        )
        return {
            "level": result.level.value,
            "threshold": rational_str(result.threshold),
            "clean": result.is_clean,
            "pairs": [
                {
                    "viewpoint_a": p.viewpoint_a.value,
                    "viewpoint_b": p.viewpoint_b.value,
                    "delta": rational_str(p.delta),
                    "delta_num": float(p.delta),
                    "sign_divergence": p.sign_divergence,
                    "delta_flag": p.delta_flag,
                    "flagged": p.flagged,
                }
                for p in result.pairs
            ],
        }

    return app
