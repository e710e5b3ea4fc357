"""GQM measurement-goal derivation from the scope matrix and indicator-coverage checks.

The engine generates five-facet measurement goals and validates
practitioner-authored question/metric trees; it does not derive questions or
metrics itself. A pool of commonly used metrics, keyed by success indicator,
ships as editable data (``metric_pool.json``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .core import (
    EvaluationViewpoint,
    Initiative,
    MeasurementLevel,
    Metric,
    MetricDirection,
    StakeholderRole,
    SuccessIndicator,
    TargetEntity,
)
from .errors import LinkageError, NothingToDeriveError
from .scoping import IndicatorKind, ScopeMatrix

GOAL_PURPOSE = "evaluate"


@dataclass(frozen=True)
class MeasurementGoal:
    """A five-facet measurement goal generated from one scope cell indicator.

    Display labels are resolved at derivation time so that statement
    rendering is a pure function of the goal.
    """

    id: str
    initiative_id: str
    indicator_id: str
    level: MeasurementLevel
    viewpoint: EvaluationViewpoint
    roles: tuple[str, ...]
    context_entities: tuple[str, ...]
    purpose: str
    object_label: str
    focus_label: str
    role_labels: tuple[str, ...]
    context_labels: tuple[str, ...]


@dataclass(frozen=True)
class GqmQuestion:
    text: str
    metric_ids: tuple[str, ...]


@dataclass(frozen=True)
class GqmTree:
    """Practitioner-authored refinement of one goal into questions and metrics."""

    goal_id: str
    questions: tuple[GqmQuestion, ...]


def derive_measurement_goals(
    initiative: Initiative,
    matrix: ScopeMatrix,
    *,
    indicators: Mapping[str, SuccessIndicator],
    roles: Mapping[str, StakeholderRole],
    entities: Mapping[str, TargetEntity],
    object_label: str | None = None,
) -> list[MeasurementGoal]:
    """Generate one goal per (cell, indicator) pair in canonical table order.

    Levels iterate outermost, viewpoints next, indicators in their cell
    order; ids are assigned MG01, MG02, ... densely in that order. The goal
    context is the initiative's target entities.
    """
    if matrix.is_empty:
        raise NothingToDeriveError("scope matrix has no populated cells; nothing to derive")

    label = object_label if object_label is not None else initiative.kind
    context_ids = tuple(initiative.target_entities)
    context_labels = tuple(
        entities[eid].name if eid in entities else eid for eid in context_ids
    )

    goals: list[MeasurementGoal] = []
    counter = 0
    for (level, viewpoint), cell in matrix.sorted_cells():
        role_labels = tuple(
            roles[rid].name if rid in roles else rid for rid in cell.roles
        )
        for cell_indicator in cell.indicators:
            indicator = indicators.get(cell_indicator.indicator_id)
            if indicator is None:
                raise LinkageError(
                    f"scope cell references unknown indicator "
                    f"{cell_indicator.indicator_id!r}"
                )
            counter += 1
            goals.append(
                MeasurementGoal(
                    id=f"MG{counter:02d}",
                    initiative_id=initiative.id,
                    indicator_id=indicator.id,
                    level=level,
                    viewpoint=viewpoint,
                    roles=tuple(cell.roles),
                    context_entities=context_ids,
                    purpose=GOAL_PURPOSE,
                    object_label=label,
                    focus_label=indicator.name.lower(),
                    role_labels=role_labels,
                    context_labels=context_labels,
                )
            )
    return goals


def render_goal_statement(goal: MeasurementGoal) -> str:
    """Render the goal template deterministically.

    "Evaluate the <object> with respect to its <focus> in <context> from the
    viewpoint of <roles>"; multiple context entities and roles are
    comma-joined.
    """
    context = ", ".join(goal.context_labels) if goal.context_labels else "the organization"
    holders = ", ".join(goal.role_labels)
    return (
        f"Evaluate the {goal.object_label} with respect to its {goal.focus_label} "
        f"in {context} from the viewpoint of {holders}"
    )


@dataclass(frozen=True)
class ComplementaryViolation:
    level: MeasurementLevel
    viewpoint: EvaluationViewpoint
    indicator_id: str
    dimension: str

    def describe(self) -> str:
        return (
            f"primary indicator {self.indicator_id!r} at {self.level.value} "
            f"({self.viewpoint.value}) has no complementary indicator of a "
            f"different triangle dimension (its own is {self.dimension})"
        )


@dataclass(frozen=True)
class ComplementaryCoverageReport:
    """Primary indicators lacking a side-effect counterweight at their level.

    Complementary indicators are mandatory for a complete evaluation; the
    match is searched across all viewpoints of the same level. Complementary
    metrics are assumed to be measured at the same cadence as their primary
    (both sit inside the level's evaluation instances).
    """

    violations: tuple[ComplementaryViolation, ...]

    @property
    def is_clean(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        return [violation.describe() for violation in self.violations]


def check_complementary_coverage(
    matrix: ScopeMatrix, indicators: Mapping[str, SuccessIndicator]
) -> ComplementaryCoverageReport:
    """Require, per primary indicator, a complementary one at the same level
    whose triangle dimension differs."""
    complementary_dimensions: dict[object, set[str]] = {}
    for (level, _viewpoint), cell in matrix.cells.items():
        for ci in cell.indicators:
            if ci.kind is IndicatorKind.COMPLEMENTARY and ci.indicator_id in indicators:
                complementary_dimensions.setdefault(level, set()).add(
                    indicators[ci.indicator_id].triangle_dimension.value
                )

    violations: list[ComplementaryViolation] = []
    for (level, viewpoint), cell in matrix.sorted_cells():
        for ci in cell.indicators:
            if ci.kind is not IndicatorKind.PRIMARY:
                continue
            indicator = indicators.get(ci.indicator_id)
            if indicator is None:
                continue
            own = indicator.triangle_dimension.value
            others = complementary_dimensions.get(level, set()) - {own}
            if not others:
                violations.append(
                    ComplementaryViolation(
                        level=level,
                        viewpoint=viewpoint,
                        indicator_id=ci.indicator_id,
                        dimension=own,
                    )
                )
    return ComplementaryCoverageReport(violations=tuple(violations))


def attach_gqm_tree(
    goal: MeasurementGoal,
    questions: Sequence[tuple[str, Sequence[str]]],
    metrics: Mapping[str, Metric],
) -> GqmTree:
    """Validate and build a question/metric tree for a goal.

    Every leaf metric must exist and serve the goal's focus indicator; an
    empty question list is allowed (questions are often authored later).
    """
    built: list[GqmQuestion] = []
    for text, metric_ids in questions:
        for metric_id in metric_ids:
            metric = metrics.get(metric_id)
            if metric is None:
                raise LinkageError(f"GQM tree references unknown metric {metric_id!r}")
            if metric.indicator_id != goal.indicator_id:
                raise LinkageError(
                    f"metric {metric_id!r} serves indicator {metric.indicator_id!r}, "
                    f"not the goal's focus {goal.indicator_id!r}"
                )
        built.append(GqmQuestion(text=text, metric_ids=tuple(metric_ids)))
    return GqmTree(goal_id=goal.id, questions=tuple(built))


@dataclass(frozen=True)
class MetricTemplate:
    """A pool entry practitioners can instantiate into a project metric."""

    name: str
    unit: str
    direction: MetricDirection


def metric_pool(path: str | Path | None = None) -> dict[str, list[MetricTemplate]]:
    """Load the metric pool (built-in file by default), keyed by indicator id."""
    if path is None:
        raw = resources.files(__package__).joinpath("metric_pool.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    data = json.loads(raw)
    pool: dict[str, list[MetricTemplate]] = {}
    for indicator_id, entries in data.items():
        pool[indicator_id] = [
            MetricTemplate(
                name=entry["name"],
                unit=entry["unit"],
                direction=MetricDirection(entry["direction"]),
            )
            for entry in entries
        ]
    return pool
