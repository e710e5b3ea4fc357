"""Project store: versioned document, audit trail, and serialized writes.

Every mutation is a named operation applied with a JSON payload; the audit
log records (revision, actor, operation, payload, timestamp) so that
replaying the log over an empty store reproduces the state exactly. Writes
carry an expected revision for optimistic concurrency; reads see immutable
snapshots (handlers mutate a copy that is swapped in atomically).
"""

from __future__ import annotations

import copy
import csv
import io
import json
import threading
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from . import scoping
from .core import (
    EntityKind,
    EvaluationViewpoint,
    Initiative,
    MeasurementLevel,
    Metric,
    MetricDirection,
    Phase,
    StakeholderRole,
    SuccessIndicator,
    TargetEntity,
    TriangleDimension,
    catalog_by_id,
    rational_str,
    to_fraction,
    validate_initiative,
)
from .errors import (
    IntegrityError,
    LinkageError,
    RevisionConflictError,
    SchemaError,
    SpiEvalError,
    UnknownOperationError,
)
from .evaluation import (
    Aggregation,
    Baseline,
    BaselineLedger,
    BaselineRole,
    ChangeClass,
    ConfoundingFactor,
    ConfoundingFactorRecord,
    ConfoundingReport,
    EvaluationStrategy,
    MitigationStatus,
    Observation,
    ObservationSource,
    StrategyChoice,
    ThresholdKind,
    Thresholds,
    confounding_report,
    establish_baseline,
    select_strategies,
)
from .holistic import (
    AsviResult,
    DivergenceReport,
    ImpactRating,
    KiviatSeries,
    SubjectiveWeight,
    SviResult,
    compute_asvi,
    compute_svi,
    divergence_report,
    kiviat_level_series,
    kiviat_viewpoint_series,
    mean_svi,
)
from .measures import (
    GqmQuestion,
    GqmTree,
    MeasurementGoal,
    attach_gqm_tree,
    check_complementary_coverage,
    derive_measurement_goals,
)
from .scheduling import (
    EvaluationInstance,
    EvaluationPurpose,
    InstanceStatus,
    LevelTiming,
    MetricOutcome,
    TimingProvenance,
    ValidityStatus,
    effective_baseline,
    execute_evaluation,
    plan_schedule,
    validity_status,
)
from .scoping import (
    BudgetHint,
    CellAssignment,
    CellIndicator,
    IndicatorKind,
    OpportunityAssessment,
    QualityRating,
    ScopeCell,
    ScopeMatrix,
    build_scope_matrix,
    scope_coverage_report,
)

SCHEMA_VERSION = 1

OBSERVATION_HEADER = ("metric_id", "entity_id", "date", "value", "source")


# ---------------------------------------------------------------------------
# State


@dataclass
class ProjectState:
    """The materialized project document (everything the audit log implies)."""

    initiative: Initiative | None = None
    entities: dict[str, TargetEntity] = field(default_factory=dict)
    roles: dict[str, StakeholderRole] = field(default_factory=dict)
    custom_indicators: dict[str, SuccessIndicator] = field(default_factory=dict)
    metrics: dict[str, Metric] = field(default_factory=dict)
    opportunity: OpportunityAssessment | None = None
    scope: ScopeMatrix | None = None
    goals: list[MeasurementGoal] = field(default_factory=list)
    gqm_trees: dict[str, GqmTree] = field(default_factory=dict)
    timings: dict[MeasurementLevel, LevelTiming] = field(default_factory=dict)
    observations: list[Observation] = field(default_factory=list)
    ledger: BaselineLedger = field(default_factory=BaselineLedger)
    instances: dict[str, EvaluationInstance] = field(default_factory=dict)
    instance_counter: int = 0
    weights: list[SubjectiveWeight] = field(default_factory=list)
    ratings: list[ImpactRating] = field(default_factory=list)
    confounding: list[ConfoundingFactorRecord] = field(default_factory=list)
    confounding_counter: int = 0
    rating_guidelines: str = ""

    def indicators(self) -> dict[str, SuccessIndicator]:
        """Catalog plus project-specific indicators, by id."""
        combined = catalog_by_id()
        combined.update(self.custom_indicators)
        return combined

    def scope_or_empty(self) -> ScopeMatrix:
        return self.scope if self.scope is not None else ScopeMatrix(frozenset(), {})


# ---------------------------------------------------------------------------
# Codec — explicit, stable field ordering for a reviewable document


def _enc_date(value: date) -> str:
    return value.isoformat()


def _enc_fraction(value: Fraction) -> str:
    return rational_str(value)


def _dec_date(raw: Any, where: str) -> date:
    try:
        return date.fromisoformat(str(raw))
    except ValueError as exc:
        raise SchemaError(f"{where}: invalid date {raw!r}") from exc


def _dec_fraction(raw: Any, where: str) -> Fraction:
    try:
        return to_fraction(raw)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{where}: invalid rational {raw!r}") from exc


def _dec_enum(enum_cls, raw: Any, where: str):
    try:
        return enum_cls(raw)
    except ValueError as exc:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SchemaError(f"{where}: {raw!r} is not one of {allowed}") from exc


def _require(mapping: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise SchemaError(f"{where}: missing field {key!r}")
    return mapping[key]


def enc_initiative(value: Initiative) -> dict[str, Any]:
    return {
        "id": value.id,
        "kind": value.kind,
        "description": value.description,
        "improvement_goals": list(value.improvement_goals),
        "process_areas": list(value.process_areas),
        "target_entities": list(value.target_entities),
        "phases": [
            {"name": p.name, "start": _enc_date(p.start), "end": _enc_date(p.end)}
            for p in value.phases
        ],
    }


def dec_initiative(raw: Mapping[str, Any], where: str = "initiative") -> Initiative:
    phases = tuple(
        Phase(
            name=str(_require(p, "name", f"{where}.phases[{i}]")),
            start=_dec_date(_require(p, "start", f"{where}.phases[{i}]"), f"{where}.phases[{i}].start"),
            end=_dec_date(_require(p, "end", f"{where}.phases[{i}]"), f"{where}.phases[{i}].end"),
        )
        for i, p in enumerate(raw.get("phases", []))
    )
    return Initiative(
        id=str(_require(raw, "id", where)),
        kind=str(raw.get("kind", "")),
        description=str(raw.get("description", "")),
        improvement_goals=tuple(str(g) for g in raw.get("improvement_goals", [])),
        process_areas=tuple(str(a) for a in raw.get("process_areas", [])),
        target_entities=tuple(str(t) for t in raw.get("target_entities", [])),
        phases=phases,
    )


def enc_entity(value: TargetEntity) -> dict[str, Any]:
    return {
        "id": value.id,
        "name": value.name,
        "kind": value.kind.value,
        "investment_unit": _enc_fraction(value.investment_unit),
    }


def dec_entity(raw: Mapping[str, Any], where: str = "entity") -> TargetEntity:
    return TargetEntity(
        id=str(_require(raw, "id", where)),
        name=str(raw.get("name", raw.get("id", ""))),
        kind=_dec_enum(EntityKind, raw.get("kind", "project"), f"{where}.kind"),
        investment_unit=_dec_fraction(raw.get("investment_unit", 0), f"{where}.investment_unit"),
    )


def enc_role(value: StakeholderRole) -> dict[str, Any]:
    return {"id": value.id, "name": value.name}


def dec_role(raw: Mapping[str, Any], where: str = "role") -> StakeholderRole:
    return StakeholderRole(
        id=str(_require(raw, "id", where)), name=str(raw.get("name", raw.get("id", "")))
    )


def enc_indicator(value: SuccessIndicator) -> dict[str, Any]:
    return {
        "id": value.id,
        "name": value.name,
        "level": value.level.value,
        "triangle_dimension": value.triangle_dimension.value,
        "catalog_entry": value.catalog_entry,
    }


def dec_indicator(raw: Mapping[str, Any], where: str = "indicator") -> SuccessIndicator:
    return SuccessIndicator(
        id=str(_require(raw, "id", where)),
        name=str(_require(raw, "name", where)),
        level=_dec_enum(MeasurementLevel, _require(raw, "level", where), f"{where}.level"),
        triangle_dimension=_dec_enum(
            TriangleDimension,
            _require(raw, "triangle_dimension", where),
            f"{where}.triangle_dimension",
        ),
        catalog_entry=False,
    )


def enc_metric(value: Metric) -> dict[str, Any]:
    return {
        "id": value.id,
        "name": value.name,
        "unit": value.unit,
        "direction": value.direction.value,
        "indicator_id": value.indicator_id,
        "evaluator_role": value.evaluator_role,
        "description": value.description,
    }


def dec_metric(raw: Mapping[str, Any], where: str = "metric") -> Metric:
    return Metric(
        id=str(_require(raw, "id", where)),
        name=str(raw.get("name", raw.get("id", ""))),
        unit=str(raw.get("unit", "")),
        direction=_dec_enum(
            MetricDirection, _require(raw, "direction", where), f"{where}.direction"
        ),
        indicator_id=str(_require(raw, "indicator_id", where)),
        evaluator_role=str(_require(raw, "evaluator_role", where)),
        description=str(raw.get("description", "")),
    )


def enc_opportunity(value: OpportunityAssessment) -> dict[str, Any]:
    return {
        "current_accuracy": value.current_accuracy.value,
        "current_coverage": value.current_coverage.value,
        "target_accuracy": value.target_accuracy.value,
        "target_coverage": value.target_coverage.value,
        "path": [[a.value, c.value] for a, c in value.path],
        "cost_estimate_per_step": [_enc_fraction(c) for c in value.cost_estimate_per_step],
        "simultaneous": value.simultaneous,
        "rationale": value.rationale,
    }


def dec_opportunity(raw: Mapping[str, Any], where: str = "opportunity") -> OpportunityAssessment:
    return OpportunityAssessment(
        current_accuracy=_dec_enum(QualityRating, _require(raw, "current_accuracy", where), where),
        current_coverage=_dec_enum(QualityRating, _require(raw, "current_coverage", where), where),
        target_accuracy=_dec_enum(QualityRating, _require(raw, "target_accuracy", where), where),
        target_coverage=_dec_enum(QualityRating, _require(raw, "target_coverage", where), where),
        path=tuple(
            (_dec_enum(QualityRating, p[0], where), _dec_enum(QualityRating, p[1], where))
            for p in raw.get("path", [])
        ),
        cost_estimate_per_step=tuple(
            _dec_fraction(c, f"{where}.cost_estimate_per_step") for c in raw.get("cost_estimate_per_step", [])
        ),
        simultaneous=bool(raw.get("simultaneous", False)),
        rationale=str(raw.get("rationale", "")),
    )


def enc_scope(value: ScopeMatrix) -> dict[str, Any]:
    return {
        "levels": [lv.value for lv in value.scoped_levels()],
        "cells": [
            {
                "level": level.value,
                "viewpoint": viewpoint.value,
                "roles": list(cell.roles),
                "indicators": [
                    {"id": ci.indicator_id, "kind": ci.kind.value} for ci in cell.indicators
                ],
            }
            for (level, viewpoint), cell in value.sorted_cells()
        ],
    }


def dec_scope(raw: Mapping[str, Any], where: str = "scope") -> ScopeMatrix:
    levels = frozenset(
        _dec_enum(MeasurementLevel, lv, f"{where}.levels") for lv in raw.get("levels", [])
    )
    cells: dict[tuple[MeasurementLevel, EvaluationViewpoint], ScopeCell] = {}
    for i, c in enumerate(raw.get("cells", [])):
        key = (
            _dec_enum(MeasurementLevel, _require(c, "level", f"{where}.cells[{i}]"), where),
            _dec_enum(EvaluationViewpoint, _require(c, "viewpoint", f"{where}.cells[{i}]"), where),
        )
        cells[key] = ScopeCell(
            roles=tuple(str(r) for r in c.get("roles", [])),
            indicators=tuple(
                CellIndicator(
                    indicator_id=str(_require(ci, "id", f"{where}.cells[{i}].indicators")),
                    kind=_dec_enum(IndicatorKind, ci.get("kind", "primary"), where),
                )
                for ci in c.get("indicators", [])
            ),
        )
    return ScopeMatrix(levels=levels, cells=cells)


def enc_goal(value: MeasurementGoal) -> dict[str, Any]:
    return {
        "id": value.id,
        "initiative_id": value.initiative_id,
        "indicator_id": value.indicator_id,
        "level": value.level.value,
        "viewpoint": value.viewpoint.value,
        "roles": list(value.roles),
        "context_entities": list(value.context_entities),
        "purpose": value.purpose,
        "object_label": value.object_label,
        "focus_label": value.focus_label,
        "role_labels": list(value.role_labels),
        "context_labels": list(value.context_labels),
    }


def dec_goal(raw: Mapping[str, Any], where: str = "goal") -> MeasurementGoal:
    return MeasurementGoal(
        id=str(_require(raw, "id", where)),
        initiative_id=str(_require(raw, "initiative_id", where)),
        indicator_id=str(_require(raw, "indicator_id", where)),
        level=_dec_enum(MeasurementLevel, _require(raw, "level", where), f"{where}.level"),
        viewpoint=_dec_enum(
            EvaluationViewpoint, _require(raw, "viewpoint", where), f"{where}.viewpoint"
        ),
        roles=tuple(str(r) for r in raw.get("roles", [])),
        context_entities=tuple(str(e) for e in raw.get("context_entities", [])),
        purpose=str(raw.get("purpose", "evaluate")),
        object_label=str(raw.get("object_label", "")),
        focus_label=str(raw.get("focus_label", "")),
        role_labels=tuple(str(r) for r in raw.get("role_labels", [])),
        context_labels=tuple(str(c) for c in raw.get("context_labels", [])),
    )


def enc_gqm_tree(value: GqmTree) -> dict[str, Any]:
    return {
        "goal_id": value.goal_id,
        "questions": [
            {"text": q.text, "metric_ids": list(q.metric_ids)} for q in value.questions
        ],
    }


def dec_gqm_tree(raw: Mapping[str, Any], where: str = "gqm_tree") -> GqmTree:
    return GqmTree(
        goal_id=str(_require(raw, "goal_id", where)),
        questions=tuple(
            GqmQuestion(
                text=str(_require(q, "text", f"{where}.questions[{i}]")),
                metric_ids=tuple(str(m) for m in q.get("metric_ids", [])),
            )
            for i, q in enumerate(raw.get("questions", []))
        ),
    )


def enc_timing(value: LevelTiming) -> dict[str, Any]:
    return {
        "level": value.level.value,
        "lag_factor": value.lag_factor,
        "degradation_factor": value.degradation_factor,
        "provenance": value.provenance.value,
    }


def dec_timing(raw: Mapping[str, Any], where: str = "timing") -> LevelTiming:
    return LevelTiming(
        level=_dec_enum(MeasurementLevel, _require(raw, "level", where), f"{where}.level"),
        lag_factor=int(_require(raw, "lag_factor", where)),
        degradation_factor=int(_require(raw, "degradation_factor", where)),
        provenance=_dec_enum(
            TimingProvenance,
            raw.get("provenance", TimingProvenance.EXPERT_ESTIMATE.value),
            f"{where}.provenance",
        ),
    )


def enc_observation(value: Observation) -> dict[str, Any]:
    return {
        "metric_id": value.metric_id,
        "entity_id": value.entity_id,
        "date": _enc_date(value.timestamp),
        "value": _enc_fraction(value.value),
        "source": value.source.value,
    }


def dec_observation(raw: Mapping[str, Any], where: str = "observation") -> Observation:
    return Observation(
        metric_id=str(_require(raw, "metric_id", where)),
        entity_id=str(_require(raw, "entity_id", where)),
        timestamp=_dec_date(_require(raw, "date", where), f"{where}.date"),
        value=_dec_fraction(_require(raw, "value", where), f"{where}.value"),
        source=_dec_enum(ObservationSource, _require(raw, "source", where), f"{where}.source"),
    )


def enc_thresholds(value: Thresholds) -> dict[str, Any]:
    return {
        "decline_bound": _enc_fraction(value.decline_bound),
        "improve_bound": _enc_fraction(value.improve_bound),
        "kind": value.kind.value,
    }


def dec_thresholds(raw: Mapping[str, Any], where: str = "thresholds") -> Thresholds:
    return Thresholds(
        decline_bound=_dec_fraction(_require(raw, "decline_bound", where), where),
        improve_bound=_dec_fraction(_require(raw, "improve_bound", where), where),
        kind=_dec_enum(ThresholdKind, raw.get("kind", ThresholdKind.RELATIVE.value), where),
    )


def enc_baseline(value: Baseline) -> dict[str, Any]:
    return {
        "id": value.id,
        "metric_id": value.metric_id,
        "entity_scope": list(value.entity_scope),
        "value": _enc_fraction(value.value),
        "established_at": _enc_date(value.established_at),
        "thresholds": enc_thresholds(value.thresholds),
        "evaluator_role": value.evaluator_role,
        "origin": value.origin,
        "aggregation": value.aggregation.value,
        "role": value.role.value,
        "supersedes": value.supersedes,
        "superseded_by": value.superseded_by,
    }


def dec_baseline(raw: Mapping[str, Any], where: str = "baseline") -> Baseline:
    return Baseline(
        id=str(_require(raw, "id", where)),
        metric_id=str(_require(raw, "metric_id", where)),
        entity_scope=tuple(str(e) for e in raw.get("entity_scope", [])),
        value=_dec_fraction(_require(raw, "value", where), f"{where}.value"),
        established_at=_dec_date(_require(raw, "established_at", where), where),
        thresholds=dec_thresholds(_require(raw, "thresholds", where), f"{where}.thresholds"),
        evaluator_role=str(_require(raw, "evaluator_role", where)),
        origin=str(raw.get("origin", "historical")),
        aggregation=_dec_enum(Aggregation, raw.get("aggregation", "mean"), where),
        role=_dec_enum(BaselineRole, raw.get("role", "active"), f"{where}.role"),
        supersedes=raw.get("supersedes"),
        superseded_by=raw.get("superseded_by"),
    )


def enc_instance(value: EvaluationInstance) -> dict[str, Any]:
    return {
        "id": value.id,
        "scheduled_date": _enc_date(value.scheduled_date),
        "level": value.level.value,
        "entity_ids": list(value.entity_ids),
        "strategy": value.strategy.value,
        "experts": list(value.experts),
        "purpose": value.purpose.value,
        "status": value.status.value,
        "executed_at": _enc_date(value.executed_at) if value.executed_at else None,
        "results": [
            {
                "metric_id": r.metric_id,
                "observed": _enc_fraction(r.observed),
                "classification": r.classification.value if r.classification else None,
                "baseline_id": r.baseline_id,
            }
            for r in value.results
        ],
    }


def dec_instance(raw: Mapping[str, Any], where: str = "instance") -> EvaluationInstance:
    results = tuple(
        MetricOutcome(
            metric_id=str(_require(r, "metric_id", f"{where}.results[{i}]")),
            observed=_dec_fraction(_require(r, "observed", f"{where}.results[{i}]"), where),
            classification=(
                _dec_enum(ChangeClass, r["classification"], where)
                if r.get("classification")
                else None
            ),
            baseline_id=r.get("baseline_id"),
        )
        for i, r in enumerate(raw.get("results", []))
    )
    executed = raw.get("executed_at")
    return EvaluationInstance(
        id=str(_require(raw, "id", where)),
        scheduled_date=_dec_date(_require(raw, "scheduled_date", where), where),
        level=_dec_enum(MeasurementLevel, _require(raw, "level", where), f"{where}.level"),
        entity_ids=tuple(str(e) for e in raw.get("entity_ids", [])),
        strategy=_dec_enum(EvaluationStrategy, _require(raw, "strategy", where), where),
        experts=tuple(str(e) for e in raw.get("experts", [])),
        purpose=_dec_enum(EvaluationPurpose, _require(raw, "purpose", where), where),
        status=_dec_enum(InstanceStatus, raw.get("status", "planned"), f"{where}.status"),
        executed_at=_dec_date(executed, where) if executed else None,
        results=results,
    )


def enc_weight(value: SubjectiveWeight) -> dict[str, Any]:
    return {
        "viewpoint": value.viewpoint.value,
        "level": value.level.value,
        "metric_id": value.metric_id,
        "weight": _enc_fraction(value.weight),
    }


def dec_weight(raw: Mapping[str, Any], where: str = "weight") -> SubjectiveWeight:
    return SubjectiveWeight(
        viewpoint=_dec_enum(EvaluationViewpoint, _require(raw, "viewpoint", where), where),
        level=_dec_enum(MeasurementLevel, _require(raw, "level", where), where),
        metric_id=str(_require(raw, "metric_id", where)),
        weight=_dec_fraction(_require(raw, "weight", where), f"{where}.weight"),
    )


def enc_rating(value: ImpactRating) -> dict[str, Any]:
    return {
        "metric_id": value.metric_id,
        "entity_id": value.entity_id,
        "rating": value.rating,
        "rater_role": value.rater_role,
        "source_instance": value.source_instance,
        "rated_at": _enc_date(value.rated_at),
    }


def dec_rating(raw: Mapping[str, Any], where: str = "rating") -> ImpactRating:
    rating_raw = _require(raw, "rating", where)
    if isinstance(rating_raw, bool) or not isinstance(rating_raw, int):
        raise SchemaError(f"{where}: rating must be an integer, got {rating_raw!r}")
    return ImpactRating(
        metric_id=str(_require(raw, "metric_id", where)),
        entity_id=str(_require(raw, "entity_id", where)),
        rating=rating_raw,
        rater_role=str(_require(raw, "rater_role", where)),
        source_instance=str(_require(raw, "source_instance", where)),
        rated_at=_dec_date(_require(raw, "rated_at", where), f"{where}.rated_at"),
    )


def enc_confounding(value: ConfoundingFactorRecord) -> dict[str, Any]:
    return {
        "id": value.id,
        "factor": value.factor.value,
        "applies_to": list(value.applies_to),
        "mitigation": value.mitigation,
        "status": value.status.value,
    }


def dec_confounding(raw: Mapping[str, Any], where: str = "confounding") -> ConfoundingFactorRecord:
    return ConfoundingFactorRecord(
        id=str(_require(raw, "id", where)),
        factor=_dec_enum(ConfoundingFactor, _require(raw, "factor", where), f"{where}.factor"),
        applies_to=tuple(str(i) for i in raw.get("applies_to", [])),
        mitigation=str(raw.get("mitigation", "")),
        status=_dec_enum(MitigationStatus, raw.get("status", "identified"), f"{where}.status"),
    )


def enc_state(state: ProjectState) -> dict[str, Any]:
    return {
        "initiative": enc_initiative(state.initiative) if state.initiative else None,
        "entities": [enc_entity(e) for e in state.entities.values()],
        "roles": [enc_role(r) for r in state.roles.values()],
        "custom_indicators": [enc_indicator(i) for i in state.custom_indicators.values()],
        "metrics": [enc_metric(m) for m in state.metrics.values()],
        "opportunity": enc_opportunity(state.opportunity) if state.opportunity else None,
        "scope": enc_scope(state.scope) if state.scope else None,
        "goals": [enc_goal(g) for g in state.goals],
        "gqm_trees": [enc_gqm_tree(t) for t in state.gqm_trees.values()],
        "timings": [enc_timing(t) for t in state.timings.values()],
        "observations": [enc_observation(o) for o in state.observations],
        "baselines": [enc_baseline(b) for b in state.ledger.records()],
        "instances": [enc_instance(i) for i in state.instances.values()],
        "instance_counter": state.instance_counter,
        "weights": [enc_weight(w) for w in state.weights],
        "ratings": [enc_rating(r) for r in state.ratings],
        "confounding": [enc_confounding(c) for c in state.confounding],
        "confounding_counter": state.confounding_counter,
        "rating_guidelines": state.rating_guidelines,
    }


def dec_state(raw: Mapping[str, Any]) -> ProjectState:
    state = ProjectState()
    if raw.get("initiative"):
        state.initiative = dec_initiative(raw["initiative"])
    for i, e in enumerate(raw.get("entities", [])):
        entity = dec_entity(e, f"entities[{i}]")
        state.entities[entity.id] = entity
    for i, r in enumerate(raw.get("roles", [])):
        role = dec_role(r, f"roles[{i}]")
        state.roles[role.id] = role
    for i, ind in enumerate(raw.get("custom_indicators", [])):
        indicator = dec_indicator(ind, f"custom_indicators[{i}]")
        state.custom_indicators[indicator.id] = indicator
    for i, m in enumerate(raw.get("metrics", [])):
        metric = dec_metric(m, f"metrics[{i}]")
        state.metrics[metric.id] = metric
    if raw.get("opportunity"):
        state.opportunity = dec_opportunity(raw["opportunity"])
    if raw.get("scope"):
        state.scope = dec_scope(raw["scope"])
    state.goals = [dec_goal(g, f"goals[{i}]") for i, g in enumerate(raw.get("goals", []))]
    for i, t in enumerate(raw.get("gqm_trees", [])):
        tree = dec_gqm_tree(t, f"gqm_trees[{i}]")
        state.gqm_trees[tree.goal_id] = tree
    for i, t in enumerate(raw.get("timings", [])):
        timing = dec_timing(t, f"timings[{i}]")
        state.timings[timing.level] = timing
    state.observations = [
        dec_observation(o, f"observations[{i}]") for i, o in enumerate(raw.get("observations", []))
    ]
    state.ledger = BaselineLedger(
        dec_baseline(b, f"baselines[{i}]") for i, b in enumerate(raw.get("baselines", []))
    )
    for i, inst in enumerate(raw.get("instances", [])):
        instance = dec_instance(inst, f"instances[{i}]")
        state.instances[instance.id] = instance
    state.instance_counter = int(raw.get("instance_counter", len(state.instances)))
    state.weights = [dec_weight(w, f"weights[{i}]") for i, w in enumerate(raw.get("weights", []))]
    state.ratings = [dec_rating(r, f"ratings[{i}]") for i, r in enumerate(raw.get("ratings", []))]
    state.confounding = [
        dec_confounding(c, f"confounding[{i}]") for i, c in enumerate(raw.get("confounding", []))
    ]
    state.confounding_counter = int(raw.get("confounding_counter", len(state.confounding)))
    state.rating_guidelines = str(raw.get("rating_guidelines", ""))
    return state


def check_integrity(state: ProjectState) -> None:
    """Validate every id link in the document; raises IntegrityError with the
    path of the first broken reference."""
    indicators = state.indicators()

    def need(condition: bool, path: str, message: str) -> None:
        if not condition:
            raise IntegrityError(f"{path}: {message}")

    if state.initiative:
        for eid in state.initiative.target_entities:
            need(eid in state.entities, "initiative.target_entities", f"unknown entity {eid!r}")
    for metric in state.metrics.values():
        need(
            metric.indicator_id in indicators,
            f"metrics[{metric.id}].indicator_id",
            f"unknown indicator {metric.indicator_id!r}",
        )
        need(
            metric.evaluator_role in state.roles,
            f"metrics[{metric.id}].evaluator_role",
            f"unknown role {metric.evaluator_role!r}",
        )
    if state.scope:
        for (level, viewpoint), cell in state.scope.cells.items():
            path = f"scope[{level.value},{viewpoint.value}]"
            need(level in state.scope.levels, path, "cell outside scoped levels")
            for rid in cell.roles:
                need(rid in state.roles, path, f"unknown role {rid!r}")
            for ci in cell.indicators:
                need(ci.indicator_id in indicators, path, f"unknown indicator {ci.indicator_id!r}")
                need(
                    indicators[ci.indicator_id].level is level,
                    path,
                    f"indicator {ci.indicator_id!r} belongs to level "
                    f"{indicators[ci.indicator_id].level.value}",
                )
    for goal in state.goals:
        need(
            goal.indicator_id in indicators,
            f"goals[{goal.id}].indicator_id",
            f"unknown indicator {goal.indicator_id!r}",
        )
    for tree in state.gqm_trees.values():
        goal_ids = {g.id for g in state.goals}
        need(
            tree.goal_id in goal_ids,
            f"gqm_trees[{tree.goal_id}]",
            f"unknown goal {tree.goal_id!r}",
        )
        for question in tree.questions:
            for mid in question.metric_ids:
                need(
                    mid in state.metrics,
                    f"gqm_trees[{tree.goal_id}]",
                    f"unknown metric {mid!r}",
                )
    for i, obs in enumerate(state.observations):
        need(
            obs.metric_id in state.metrics,
            f"observations[{i}].metric_id",
            f"unknown metric {obs.metric_id!r}",
        )
        need(
            obs.entity_id in state.entities,
            f"observations[{i}].entity_id",
            f"unknown entity {obs.entity_id!r}",
        )
    active_seen: set[str] = set()
    for baseline in state.ledger:
        need(
            baseline.metric_id in state.metrics,
            f"baselines[{baseline.id}].metric_id",
            f"unknown metric {baseline.metric_id!r}",
        )
        if baseline.role is BaselineRole.ACTIVE:
            need(
                baseline.metric_id not in active_seen,
                f"baselines[{baseline.id}]",
                f"second active baseline for metric {baseline.metric_id!r}",
            )
            active_seen.add(baseline.metric_id)
    for instance in state.instances.values():
        path = f"instances[{instance.id}]"
        for eid in instance.entity_ids:
            need(eid in state.entities, path, f"unknown entity {eid!r}")
        for rid in instance.experts:
            need(rid in state.roles, path, f"unknown role {rid!r}")
        for result in instance.results:
            need(
                result.metric_id in state.metrics,
                path,
                f"result references unknown metric {result.metric_id!r}",
            )
            if result.baseline_id is not None:
                need(
                    state.ledger.get(result.baseline_id) is not None,
                    path,
                    f"result references unknown baseline {result.baseline_id!r}",
                )
    for i, weight in enumerate(state.weights):
        need(
            weight.metric_id in state.metrics,
            f"weights[{i}].metric_id",
            f"unknown metric {weight.metric_id!r}",
        )
    for i, rating in enumerate(state.ratings):
        path = f"ratings[{i}]"
        need(
            rating.metric_id in state.metrics,
            path,
            f"unknown metric {rating.metric_id!r}",
        )
        need(
            rating.entity_id in state.entities,
            path,
            f"unknown entity {rating.entity_id!r}",
        )
        need(
            rating.source_instance in state.instances,
            path,
            f"unknown instance {rating.source_instance!r}",
        )
        need(
            state.instances[rating.source_instance].status is InstanceStatus.DONE,
            path,
            f"source instance {rating.source_instance!r} is not done",
        )
        metric = state.metrics[rating.metric_id]
        need(
            rating.rater_role == metric.evaluator_role,
            path,
            f"rater {rating.rater_role!r} is not the metric's nominated evaluator "
            f"{metric.evaluator_role!r}",
        )
    for record in state.confounding:
        for iid in record.applies_to:
            need(
                iid in state.instances,
                f"confounding[{record.id}].applies_to",
                f"unknown instance {iid!r}",
            )


# ---------------------------------------------------------------------------
# Operation handlers (state, payload) -> JSON-able result


def _op_init(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    if state.initiative is not None:
        raise SpiEvalError("project is already initialized")
    state.initiative = dec_initiative(_require(payload, "initiative", "init"))
    for i, raw in enumerate(payload.get("entities", [])):
        entity = dec_entity(raw, f"init.entities[{i}]")
        state.entities[entity.id] = entity
    for i, raw in enumerate(payload.get("roles", [])):
        role = dec_role(raw, f"init.roles[{i}]")
        state.roles[role.id] = role
    for i, raw in enumerate(payload.get("indicators", [])):
        indicator = dec_indicator(raw, f"init.indicators[{i}]")
        if indicator.id in catalog_by_id():
            raise SpiEvalError(f"indicator id {indicator.id!r} collides with the catalog")
        state.custom_indicators[indicator.id] = indicator
    for i, raw in enumerate(payload.get("metrics", [])):
        metric = dec_metric(raw, f"init.metrics[{i}]")
        _check_metric_links(state, metric)
        state.metrics[metric.id] = metric
    for i, raw in enumerate(payload.get("timings", [])):
        timing = dec_timing(raw, f"init.timings[{i}]")
        state.timings[timing.level] = timing
    state.rating_guidelines = str(payload.get("rating_guidelines", ""))
    return {"initiative": state.initiative.id, "validation": validate_initiative(state.initiative)}


def _check_metric_links(state: ProjectState, metric: Metric) -> None:
    if metric.indicator_id not in state.indicators():
        raise LinkageError(
            f"metric {metric.id!r} references unknown indicator {metric.indicator_id!r}"
        )
    if metric.evaluator_role not in state.roles:
        raise LinkageError(
            f"metric {metric.id!r} references unknown evaluator role "
            f"{metric.evaluator_role!r}"
        )


def _op_set_initiative(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    state.initiative = dec_initiative(_require(payload, "initiative", "set-initiative"))
    for eid in state.initiative.target_entities:
        if eid not in state.entities:
            raise LinkageError(f"initiative references unknown entity {eid!r}")
    return {"validation": validate_initiative(state.initiative)}


def _op_add_entity(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    entity = dec_entity(payload, "add-entity")
    state.entities[entity.id] = entity
    return {"id": entity.id}


def _op_add_role(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    role = dec_role(payload, "add-role")
    state.roles[role.id] = role
    return {"id": role.id}


def _op_add_indicator(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    indicator = dec_indicator(payload, "add-indicator")
    if indicator.id in catalog_by_id():
        raise SpiEvalError(f"indicator id {indicator.id!r} collides with the catalog")
    state.custom_indicators[indicator.id] = indicator
    return {"id": indicator.id}


def _op_add_metric(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    metric = dec_metric(payload, "add-metric")
    _check_metric_links(state, metric)
    state.metrics[metric.id] = metric
    return {"id": metric.id}


def _op_set_timings(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    for i, raw in enumerate(payload.get("timings", [])):
        timing = dec_timing(raw, f"set-timings[{i}]")
        state.timings[timing.level] = timing
    return {"levels": [t.level.value for t in state.timings.values()]}


def _op_set_opportunity(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    current = _require(payload, "current", "set-opportunity")
    target = _require(payload, "target", "set-opportunity")
    hint = payload.get("budget_hint")
    costs = payload.get("step_costs")
    assessment = scoping.assess_gap(
        (
            _dec_enum(QualityRating, current[0], "set-opportunity.current"),
            _dec_enum(QualityRating, current[1], "set-opportunity.current"),
        ),
        (
            _dec_enum(QualityRating, target[0], "set-opportunity.target"),
            _dec_enum(QualityRating, target[1], "set-opportunity.target"),
        ),
        budget_hint=_dec_enum(BudgetHint, hint, "set-opportunity.budget_hint") if hint else None,
        step_costs=[_dec_fraction(c, "set-opportunity.step_costs") for c in costs]
        if costs is not None
        else None,
        rationale=str(payload.get("rationale", "")),
    )
    state.opportunity = assessment
    return enc_opportunity(assessment)


def _op_set_scope(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    levels = [
        _dec_enum(MeasurementLevel, lv, "set-scope.levels") for lv in payload.get("levels", [])
    ]
    assignments = []
    for i, raw in enumerate(payload.get("assignments", [])):
        where = f"set-scope.assignments[{i}]"
        roles = tuple(str(r) for r in raw.get("roles", []))
        for rid in roles:
            if rid not in state.roles:
                raise LinkageError(f"{where}: unknown role {rid!r}")
        assignments.append(
            CellAssignment(
                level=_dec_enum(MeasurementLevel, _require(raw, "level", where), where),
                viewpoint=_dec_enum(
                    EvaluationViewpoint, _require(raw, "viewpoint", where), where
                ),
                roles=roles,
                indicators=tuple(
                    CellIndicator(
                        indicator_id=str(_require(ci, "id", where)),
                        kind=_dec_enum(IndicatorKind, ci.get("kind", "primary"), where),
                    )
                    for ci in raw.get("indicators", [])
                ),
            )
        )
    state.scope = build_scope_matrix(levels, assignments, state.indicators())
    report = scope_coverage_report(state.scope)
    return {"scope": enc_scope(state.scope), "coverage_warnings": report.lines()}


def _op_derive_goals(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    if state.initiative is None:
        raise SpiEvalError("no initiative defined; run init first")
    matrix = state.scope_or_empty()
    goals = derive_measurement_goals(
        state.initiative,
        matrix,
        indicators=state.indicators(),
        roles=state.roles,
        entities=state.entities,
        object_label=payload.get("object_label"),
    )
    state.goals = goals
    state.gqm_trees = {}
    return {"count": len(goals), "ids": [g.id for g in goals]}


def _op_attach_gqm_tree(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    goal_id = str(_require(payload, "goal_id", "attach-gqm-tree"))
    goal = next((g for g in state.goals if g.id == goal_id), None)
    if goal is None:
        raise LinkageError(f"unknown goal {goal_id!r}")
    questions = [
        (str(_require(q, "text", "attach-gqm-tree.questions")), [str(m) for m in q.get("metric_ids", [])])
        for q in payload.get("questions", [])
    ]
    tree = attach_gqm_tree(goal, questions, state.metrics)
    state.gqm_trees[goal_id] = tree
    return enc_gqm_tree(tree)


def _op_ingest_observations(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    mode = str(payload.get("mode", "strict"))
    rows = payload.get("rows", [])
    errors: list[dict[str, Any]] = []
    warnings: list[dict[str, Any]] = []
    incoming: dict[tuple[str, str, str], tuple[int, Observation]] = {}
    for raw in rows:
        line = int(raw.get("line", 0))
        try:
            observation = dec_observation(raw, f"line {line}")
        except SchemaError as exc:
            errors.append({"line": line, "message": str(exc)})
            continue
        if observation.metric_id not in state.metrics:
            errors.append(
                {"line": line, "message": f"unknown metric id {observation.metric_id!r}"}
            )
            continue
        if observation.entity_id not in state.entities:
            errors.append(
                {"line": line, "message": f"unknown entity id {observation.entity_id!r}"}
            )
            continue
        key = (
            observation.metric_id,
            observation.entity_id,
            observation.timestamp.isoformat(),
        )
        if key in incoming:
            message = (
                f"duplicate row for (metric {key[0]}, entity {key[1]}, date {key[2]})"
            )
            if mode == "strict":
                errors.append({"line": line, "message": message})
                continue
            warnings.append({"line": line, "message": message + "; last row wins"})
        incoming[key] = (line, observation)

    existing_keys = {
        (o.metric_id, o.entity_id, o.timestamp.isoformat()): i
        for i, o in enumerate(state.observations)
    }
    replacing = [key for key in incoming if key in existing_keys]
    for key in replacing:
        message = f"row replaces an existing observation for (metric {key[0]}, entity {key[1]}, date {key[2]})"
        if mode == "strict":
            errors.append({"line": incoming[key][0], "message": message})
        else:
            warnings.append({"line": incoming[key][0], "message": message + "; last wins"})

    if errors and mode == "strict":
        raise IngestionAbort(errors=errors, warnings=warnings)

    for key, (_line, observation) in incoming.items():
        if key in existing_keys:
            state.observations[existing_keys[key]] = observation
        else:
            state.observations.append(observation)
    return {"stored": len(incoming), "errors": errors, "warnings": warnings}


class IngestionAbort(SpiEvalError):
    """Strict-mode ingestion failed; carries the per-row error list."""

    def __init__(self, errors: list[dict[str, Any]], warnings: list[dict[str, Any]]):
        super().__init__(f"{len(errors)} row error(s); nothing ingested (strict mode)")
        self.errors = errors
        self.warnings = warnings


def _op_establish_baseline(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    metric_id = str(_require(payload, "metric_id", "establish-baseline"))
    if metric_id not in state.metrics:
        raise LinkageError(f"unknown metric {metric_id!r}")
    thresholds = dec_thresholds(
        _require(payload, "thresholds", "establish-baseline"), "establish-baseline.thresholds"
    )
    evaluator = str(
        payload.get("evaluator_role", state.metrics[metric_id].evaluator_role)
    )
    if evaluator not in state.roles:
        raise LinkageError(f"unknown evaluator role {evaluator!r}")
    established_at = _dec_date(
        _require(payload, "established_at", "establish-baseline"), "establish-baseline"
    )
    aggregation = _dec_enum(
        Aggregation, payload.get("aggregation", "mean"), "establish-baseline.aggregation"
    )
    value = payload.get("value")
    selector = payload.get("from_observations") or {}
    observations: list[Observation] = []
    if value is None:
        sources = {
            _dec_enum(ObservationSource, s, "establish-baseline.from_observations")
            for s in selector.get("sources", [s.value for s in ObservationSource])
        }
        entity_filter = set(selector.get("entity_ids", []))
        until = selector.get("until")
        until_date = _dec_date(until, "establish-baseline.until") if until else None
        observations = [
            o
            for o in state.observations
            if o.metric_id == metric_id
            and o.source in sources
            and (not entity_filter or o.entity_id in entity_filter)
            and (until_date is None or o.timestamp <= until_date)
        ]
    baseline = establish_baseline(
        state.ledger,
        metric_id,
        observations=observations,
        value=_dec_fraction(value, "establish-baseline.value") if value is not None else None,
        thresholds=thresholds,
        evaluator_role=evaluator,
        established_at=established_at,
        entity_scope=tuple(payload.get("entity_scope", [])),
        origin=str(payload.get("origin", "historical")),
        aggregation=aggregation,
    )
    return enc_baseline(baseline)


def _op_plan_schedule(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    if state.initiative is None:
        raise SpiEvalError("no initiative defined; run init first")
    start = _dec_date(_require(payload, "from", "plan-schedule"), "plan-schedule.from")
    end = _dec_date(_require(payload, "to", "plan-schedule"), "plan-schedule.to")
    scoped_levels = (
        state.scope.scoped_levels() if state.scope is not None else list(state.timings)
    )
    missing = [lv.value for lv in scoped_levels if lv not in state.timings]
    if missing:
        raise SpiEvalError(
            "timings missing for scoped levels: " + ", ".join(missing)
        )
    timings = {lv: state.timings[lv] for lv in scoped_levels if lv in state.timings}
    entity_starts = {
        str(k): _dec_date(v, f"plan-schedule.entity_starts[{k}]")
        for k, v in (payload.get("entity_starts") or {}).items()
    }
    strategy_by_level = {
        _dec_enum(MeasurementLevel, k, "plan-schedule.strategies"): _dec_enum(
            EvaluationStrategy, v, "plan-schedule.strategies"
        )
        for k, v in (payload.get("strategies") or {}).items()
    }
    plan = plan_schedule(
        state.initiative,
        timings,
        (start, end),
        metrics=state.metrics,
        indicators=state.indicators(),
        ledger=state.ledger,
        entity_starts=entity_starts,
        strategy_by_level=strategy_by_level or None,
        id_start=state.instance_counter + 1,
    )
    for instance in plan.instances:
        state.instances[instance.id] = instance
    state.instance_counter += len(plan.instances)
    return {
        "instances": [enc_instance(i) for i in plan.instances],
        "warnings": list(plan.warnings),
    }


def _op_add_instance(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    level = _dec_enum(MeasurementLevel, _require(payload, "level", "add-instance"), "add-instance")
    entity_ids = tuple(str(e) for e in payload.get("entity_ids", []))
    for eid in entity_ids:
        if eid not in state.entities:
            raise LinkageError(f"unknown entity {eid!r}")
    experts = tuple(str(e) for e in payload.get("experts", []))
    if not experts:
        indicators = state.indicators()
        experts = tuple(
            sorted(
                {
                    m.evaluator_role
                    for m in state.metrics.values()
                    if indicators.get(m.indicator_id)
                    and indicators[m.indicator_id].level is level
                }
            )
        )
    for rid in experts:
        if rid not in state.roles:
            raise LinkageError(f"unknown role {rid!r}")
    strategy_raw = payload.get("strategy")
    strategy = (
        _dec_enum(EvaluationStrategy, strategy_raw, "add-instance.strategy")
        if strategy_raw
        else select_strategies({level})[0].strategy
    )
    state.instance_counter += 1
    instance = EvaluationInstance(
        id=f"EI{state.instance_counter:02d}",
        scheduled_date=_dec_date(
            _require(payload, "scheduled_date", "add-instance"), "add-instance"
        ),
        level=level,
        entity_ids=entity_ids,
        strategy=strategy,
        experts=experts,
        purpose=_dec_enum(
            EvaluationPurpose, _require(payload, "purpose", "add-instance"), "add-instance"
        ),
    )
    state.instances[instance.id] = instance
    return enc_instance(instance)


def _op_execute_evaluation(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    instance_id = str(_require(payload, "instance_id", "execute-evaluation"))
    instance = state.instances.get(instance_id)
    if instance is None:
        raise LinkageError(f"unknown evaluation instance {instance_id!r}")
    timing = state.timings.get(instance.level)
    if timing is None:
        raise SpiEvalError(f"no timing defined for level {instance.level.value}")
    executed_raw = payload.get("executed_on")
    executed_on = (
        _dec_date(executed_raw, "execute-evaluation.executed_on")
        if executed_raw
        else instance.scheduled_date
    )
    observations: list[Observation] = []
    for i, raw in enumerate(payload.get("observations", [])):
        where = f"execute-evaluation.observations[{i}]"
        metric_id = str(_require(raw, "metric_id", where))
        if metric_id not in state.metrics:
            raise LinkageError(f"{where}: unknown metric {metric_id!r}")
        entity_id = str(_require(raw, "entity_id", where))
        if entity_id not in state.entities:
            raise LinkageError(f"{where}: unknown entity {entity_id!r}")
        when = raw.get("date")
        observations.append(
            Observation(
                metric_id=metric_id,
                entity_id=entity_id,
                timestamp=_dec_date(when, where) if when else executed_on,
                value=_dec_fraction(_require(raw, "value", where), where),
                source=ObservationSource.EVALUATION,
            )
        )
    thresholds = {
        str(mid): dec_thresholds(t, f"execute-evaluation.thresholds[{mid}]")
        for mid, t in (payload.get("thresholds") or {}).items()
    }
    done = execute_evaluation(
        instance,
        observations,
        metrics=state.metrics,
        indicators=state.indicators(),
        ledger=state.ledger,
        timing=timing,
        executed_on=executed_on,
        thresholds=thresholds or None,
        aggregation=_dec_enum(
            Aggregation, payload.get("aggregation", "mean"), "execute-evaluation.aggregation"
        ),
    )
    state.instances[instance_id] = done
    state.observations.extend(observations)
    return enc_instance(done)


def _op_set_weights(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    incoming = [
        dec_weight(w, f"set-weights[{i}]") for i, w in enumerate(payload.get("weights", []))
    ]
    for weight in incoming:
        if weight.metric_id not in state.metrics:
            raise LinkageError(f"weight references unknown metric {weight.metric_id!r}")
    keyed = {(w.viewpoint, w.level, w.metric_id): w for w in state.weights}
    for weight in incoming:
        keyed[(weight.viewpoint, weight.level, weight.metric_id)] = weight
    state.weights = list(keyed.values())
    return {"count": len(incoming)}


def _op_add_rating(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    metric_id = str(_require(payload, "metric_id", "add-rating"))
    metric = state.metrics.get(metric_id)
    if metric is None:
        raise LinkageError(f"unknown metric {metric_id!r}")
    entity_id = str(_require(payload, "entity_id", "add-rating"))
    if entity_id not in state.entities:
        raise LinkageError(f"unknown entity {entity_id!r}")
    source = str(_require(payload, "source_instance", "add-rating"))
    instance = state.instances.get(source)
    if instance is None:
        raise LinkageError(f"unknown evaluation instance {source!r}")
    if instance.status is not InstanceStatus.DONE:
        raise SpiEvalError(
            f"instance {source!r} has not been executed; ratings need a done evaluation"
        )
    rater = str(payload.get("rater_role", metric.evaluator_role))
    rating = dec_rating(
        {
            "metric_id": metric_id,
            "entity_id": entity_id,
            "rating": _require(payload, "rating", "add-rating"),
            "rater_role": rater,
            "source_instance": source,
            "rated_at": _require(payload, "rated_at", "add-rating"),
        },
        "add-rating",
    )
    if rating.rater_role != metric.evaluator_role:
        raise SpiEvalError(
            f"rater {rating.rater_role!r} is not the nominated evaluator "
            f"{metric.evaluator_role!r} for metric {metric_id!r}"
        )
    replaced = False
    for i, existing in enumerate(state.ratings):
        if (
            existing.metric_id == rating.metric_id
            and existing.entity_id == rating.entity_id
            and existing.source_instance == rating.source_instance
        ):
            state.ratings[i] = rating
            replaced = True
            break
    if not replaced:
        state.ratings.append(rating)
    return {"replaced": replaced, **enc_rating(rating)}


def _op_add_confounding(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    applies_to = tuple(str(i) for i in payload.get("applies_to", []))
    for iid in applies_to:
        if iid not in state.instances:
            raise LinkageError(f"unknown evaluation instance {iid!r}")
    state.confounding_counter += 1
    record = ConfoundingFactorRecord(
        id=f"CF{state.confounding_counter:02d}",
        factor=_dec_enum(
            ConfoundingFactor, _require(payload, "factor", "add-confounding"), "add-confounding"
        ),
        applies_to=applies_to,
        mitigation=str(payload.get("mitigation", "")),
        status=_dec_enum(
            MitigationStatus, payload.get("status", "identified"), "add-confounding"
        ),
    )
    state.confounding.append(record)
    return enc_confounding(record)


def _op_set_rating_guidelines(state: ProjectState, payload: Mapping[str, Any]) -> dict[str, Any]:
    state.rating_guidelines = str(_require(payload, "text", "set-rating-guidelines"))
    return {"length": len(state.rating_guidelines)}


_HANDLERS: dict[str, Callable[[ProjectState, Mapping[str, Any]], dict[str, Any]]] = {
    "init": _op_init,
    "set-initiative": _op_set_initiative,
    "add-entity": _op_add_entity,
    "add-role": _op_add_role,
    "add-indicator": _op_add_indicator,
    "add-metric": _op_add_metric,
    "set-timings": _op_set_timings,
    "set-opportunity": _op_set_opportunity,
    "set-scope": _op_set_scope,
    "derive-goals": _op_derive_goals,
    "attach-gqm-tree": _op_attach_gqm_tree,
    "ingest-observations": _op_ingest_observations,
    "establish-baseline": _op_establish_baseline,
    "plan-schedule": _op_plan_schedule,
    "add-instance": _op_add_instance,
    "execute-evaluation": _op_execute_evaluation,
    "set-weights": _op_set_weights,
    "add-rating": _op_add_rating,
    "add-confounding": _op_add_confounding,
    "set-rating-guidelines": _op_set_rating_guidelines,
}


@dataclass(frozen=True)
class AuditEntry:
    revision: int
    actor: str
    operation: str
    payload: dict[str, Any]
    timestamp: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "revision": self.revision,
            "actor": self.actor,
            "operation": self.operation,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class IngestionReport:
    """Outcome of an observation-file ingestion."""

    stored: int
    errors: tuple[dict[str, Any], ...]
    warnings: tuple[dict[str, Any], ...]
    applied: bool

    @property
    def ok(self) -> bool:
        return not self.errors


class ProjectStore:
    """One project's document with revisioned, audited, serialized writes."""

    def __init__(self, state: ProjectState | None = None):
        self._state = state if state is not None else ProjectState()
        self._revision = 0
        self._audit: list[AuditEntry] = []
        self._lock = threading.RLock()

    # -- snapshot reads -----------------------------------------------------

    @property
    def state(self) -> ProjectState:
        """Current immutable-by-convention snapshot; never mutate it."""
        return self._state

    @property
    def revision(self) -> int:
        return self._revision

    @property
    def audit(self) -> list[AuditEntry]:
        return list(self._audit)

    # -- writes ---------------------------------------------------------------

    def apply(
        self,
        operation: str,
        payload: Mapping[str, Any] | None = None,
        *,
        actor: str = "anonymous",
        expected_revision: int | None = None,
        timestamp: str | None = None,
    ) -> dict[str, Any]:
        """Apply a named operation; bumps the revision exactly once.

        The handler works on a copy of the state that is swapped in only on
        success, so a failed operation leaves the store untouched and
        readers never see partial writes.
        """
        handler = _HANDLERS.get(operation)
        if handler is None:
            raise UnknownOperationError(f"unknown operation {operation!r}")
        payload = dict(payload or {})
        with self._lock:
            if expected_revision is not None and expected_revision != self._revision:
                raise RevisionConflictError(expected_revision, self._revision)
            working = copy.deepcopy(self._state)
            result = handler(working, payload)
            self._state = working
            self._revision += 1
            self._audit.append(
                AuditEntry(
                    revision=self._revision,
                    actor=actor,
                    operation=operation,
                    payload=payload,
                    timestamp=timestamp
                    or datetime.now(timezone.utc).isoformat(timespec="seconds"),
                )
            )
            return result

    # -- persistence ----------------------------------------------------------

    def to_document(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "revision": self._revision,
            "state": enc_state(self._state),
            "audit": [entry.to_dict() for entry in self._audit],
        }

    def save(self, path: str | Path) -> None:
        document = self.to_document()
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
        Path(path).write_text(text, encoding="utf-8")

    @classmethod
    def from_document(cls, document: Mapping[str, Any]) -> "ProjectStore":
        version = document.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported schema version {version!r} (supported: {SCHEMA_VERSION})"
            )
        state = dec_state(document.get("state", {}))
        check_integrity(state)
        store = cls(state)
        store._revision = int(document.get("revision", 0))
        store._audit = [
            AuditEntry(
                revision=int(e["revision"]),
                actor=str(e.get("actor", "anonymous")),
                operation=str(e["operation"]),
                payload=dict(e.get("payload", {})),
                timestamp=str(e.get("timestamp", "")),
            )
            for e in document.get("audit", [])
        ]
        if len(store._audit) != store._revision:
            raise SchemaError(
                f"audit log has {len(store._audit)} entries but revision is "
                f"{store._revision}; the document is incomplete"
            )
        return store

    @classmethod
    def load(cls, path: str | Path) -> "ProjectStore":
        target = Path(path)
        if not target.exists():
            raise SchemaError(f"project file not found: {target}")
        try:
            document = json.loads(target.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"project file does not parse: {exc}") from exc
        return cls.from_document(document)

    @classmethod
    def replay(cls, audit: Iterable[AuditEntry]) -> "ProjectStore":
        """Rebuild a store by re-applying the audit log over an empty one."""
        store = cls()
        for entry in sorted(audit, key=lambda e: e.revision):
            store.apply(
                entry.operation,
                entry.payload,
                actor=entry.actor,
                timestamp=entry.timestamp,
            )
        return store

    # -- domain queries (thin wrappers over the pure modules) -----------------

    def validation_report(self) -> list[str]:
        if self._state.initiative is None:
            return ["missing initiative (project not initialized)"]
        return validate_initiative(self._state.initiative)

    def coverage_report(self):
        return scope_coverage_report(self._state.scope_or_empty())

    def complementary_report(self):
        return check_complementary_coverage(
            self._state.scope_or_empty(), self._state.indicators()
        )

    def strategies(
        self,
        levels: Iterable[MeasurementLevel],
        budget=None,
        require_controllable_confounding: bool = False,
    ) -> list[StrategyChoice]:
        return select_strategies(levels, budget, require_controllable_confounding)

    def confounding(self) -> ConfoundingReport:
        return confounding_report(
            list(self._state.instances.values()), self._state.confounding
        )

    def effective_baseline(self, metric_id: str, query_date: date) -> Baseline | None:
        state = self._state
        metric = state.metrics.get(metric_id)
        if metric is None:
            raise LinkageError(f"unknown metric {metric_id!r}")
        indicator = state.indicators().get(metric.indicator_id)
        timing = state.timings.get(indicator.level) if indicator else None
        if timing is None:
            raise SpiEvalError(f"no timing defined for metric {metric_id!r}'s level")
        return effective_baseline(
            state.ledger.for_metric(metric_id), metric_id, query_date, timing
        )

    def instance_validity(self, instance_id: str, as_of: date) -> ValidityStatus:
        instance = self._state.instances.get(instance_id)
        if instance is None:
            raise LinkageError(f"unknown evaluation instance {instance_id!r}")
        timing = self._state.timings.get(instance.level)
        if timing is None:
            raise SpiEvalError(f"no timing defined for level {instance.level.value}")
        return validity_status(instance, as_of, timing)

    def svi(
        self,
        viewpoint: EvaluationViewpoint,
        level: MeasurementLevel,
        entity_id: str,
        as_of: date,
        weight_overrides: Mapping[str, Fraction] | None = None,
    ) -> SviResult:
        """Compute a score; ``weight_overrides`` makes it a transient what-if
        (the stored weights are replaced for this computation only)."""
        state = self._state
        if weight_overrides is not None:
            weights: Sequence[SubjectiveWeight] = [
                SubjectiveWeight(
                    viewpoint=viewpoint,
                    level=level,
                    metric_id=metric_id,
                    weight=to_fraction(weight),
                )
                for metric_id, weight in weight_overrides.items()
            ]
        else:
            weights = state.weights
        return compute_svi(
            viewpoint,
            level,
            entity_id,
            as_of,
            weights=weights,
            ratings=state.ratings,
            instances=state.instances,
            timings=state.timings,
        )

    def svi_by_viewpoint(
        self, level: MeasurementLevel, entity_id: str, as_of: date
    ) -> dict[EvaluationViewpoint, SviResult]:
        from .core import VIEWPOINTS
        from .errors import DegenerateWeightsError, NoDataError

        out: dict[EvaluationViewpoint, SviResult] = {}
        for viewpoint in VIEWPOINTS:
            try:
                out[viewpoint] = self.svi(viewpoint, level, entity_id, as_of)
            except (DegenerateWeightsError, NoDataError):
                continue
        return out

    def asvi(
        self,
        level: MeasurementLevel,
        as_of: date,
        viewpoint: EvaluationViewpoint | None = None,
    ) -> AsviResult:
        from .errors import DegenerateWeightsError, NoDataError

        state = self._state
        entity_svis: list[SviResult] = []
        for entity_id in sorted(state.entities):
            if viewpoint is not None:
                try:
                    entity_svis.append(self.svi(viewpoint, level, entity_id, as_of))
                except (DegenerateWeightsError, NoDataError):
                    continue
            else:
                per_entity = list(self.svi_by_viewpoint(level, entity_id, as_of).values())
                if per_entity:
                    entity_svis.append(mean_svi(per_entity))
        return compute_asvi(level, as_of, entity_svis, state.entities)

    def kiviat_viewpoints(
        self, level: MeasurementLevel, entity_id: str, as_of: date
    ) -> KiviatSeries:
        state = self._state
        return kiviat_viewpoint_series(
            level,
            entity_id,
            as_of,
            weights=state.weights,
            ratings=state.ratings,
            instances=state.instances,
            timings=state.timings,
        )

    def kiviat_levels(
        self,
        as_of: date,
        levels: Iterable[MeasurementLevel] | None = None,
        viewpoint: EvaluationViewpoint | None = None,
    ) -> KiviatSeries:
        state = self._state
        if levels is None:
            levels = state.scope.scoped_levels() if state.scope else list(state.timings)
        return kiviat_level_series(
            levels,
            as_of,
            weights=state.weights,
            ratings=state.ratings,
            instances=state.instances,
            timings=state.timings,
            entities=state.entities,
            viewpoint=viewpoint,
        )

    def divergence(
        self,
        level: MeasurementLevel,
        entity_id: str,
        as_of: date,
        threshold: Fraction = Fraction(2),
    ) -> DivergenceReport:
        svis = list(self.svi_by_viewpoint(level, entity_id, as_of).values())
        return divergence_report(level, svis, threshold)


def parse_observation_file(text: str) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """Parse the delimited observation format into row payloads plus errors.

    Header must be exactly ``metric_id,entity_id,date,value,source``; dates
    ISO 8601, values rational. Rows keep their 1-based line numbers.
    """
    reader = csv.reader(io.StringIO(text))
    rows: list[dict[str, Any]] = []
    errors: list[dict[str, Any]] = []
    header: list[str] | None = None
    for line_number, fields in enumerate(reader, start=1):
        if header is None:
            header = [f.strip() for f in fields]
            if tuple(header) != OBSERVATION_HEADER:
                errors.append(
                    {
                        "line": line_number,
                        "message": "header must be exactly "
                        + ",".join(OBSERVATION_HEADER)
                        + f", got {','.join(header)}",
                    }
                )
                return [], errors
            continue
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(OBSERVATION_HEADER):
            errors.append(
                {
                    "line": line_number,
                    "message": f"expected {len(OBSERVATION_HEADER)} fields, got {len(fields)}",
                }
            )
            continue
        raw = dict(zip(OBSERVATION_HEADER, (f.strip() for f in fields)))
        try:
            date.fromisoformat(raw["date"])
        except ValueError:
            errors.append({"line": line_number, "message": f"unparseable date {raw['date']!r}"})
            continue
        try:
            value = to_fraction(raw["value"])
        except (ValueError, TypeError):
            errors.append({"line": line_number, "message": f"unparseable value {raw['value']!r}"})
            continue
        try:
            ObservationSource(raw["source"])
        except ValueError:
            errors.append({"line": line_number, "message": f"unknown source {raw['source']!r}"})
            continue
        rows.append(
            {
                "line": line_number,
                "metric_id": raw["metric_id"],
                "entity_id": raw["entity_id"],
                "date": raw["date"],
                "value": rational_str(value),
                "source": raw["source"],
            }
        )
    return rows, errors


def ingest_observations(
    store: ProjectStore,
    source: str | Path,
    *,
    strict: bool = True,
    actor: str = "anonymous",
    expected_revision: int | None = None,
) -> IngestionReport:
    """Ingest a delimited observation file (path or raw text); strict mode is
    all-or-nothing."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif "\n" not in source and Path(source).exists():
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = str(source)
    rows, parse_errors = parse_observation_file(text)
    if parse_errors and strict:
        return IngestionReport(
            stored=0, errors=tuple(parse_errors), warnings=(), applied=False
        )
    if not rows:
        return IngestionReport(
            stored=0, errors=tuple(parse_errors), warnings=(), applied=False
        )
    try:
        result = store.apply(
            "ingest-observations",
            {"rows": rows, "mode": "strict" if strict else "last-wins"},
            actor=actor,
            expected_revision=expected_revision,
        )
    except IngestionAbort as abort:
        return IngestionReport(
            stored=0,
            errors=tuple(parse_errors) + tuple(abort.errors),
            warnings=tuple(abort.warnings),
            applied=False,
        )
    return IngestionReport(
        stored=int(result["stored"]),
        errors=tuple(parse_errors) + tuple(result["errors"]),
        warnings=tuple(result["warnings"]),
        applied=True,
    )
