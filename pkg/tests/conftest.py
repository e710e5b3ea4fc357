"""Shared fixtures: the worked-example project (code inspections at a
medium-sized product organization) used across the suite."""

from __future__ import annotations

from datetime import date, timedelta
from fractions import Fraction

import pytest

from spieval.core import (
    EntityKind,
    EvaluationViewpoint,
    Initiative,
    MeasurementLevel,
    Metric,
    MetricDirection,
    Phase,
    StakeholderRole,
    TargetEntity,
    catalog_by_id,
    find_catalog_indicator,
)
from spieval.scoping import (
    CellAssignment,
    CellIndicator,
    IndicatorKind,
    build_scope_matrix,
)

BASE_DATE = date(2024, 1, 1)


def month(m: int) -> date:
    """Worked examples count in months; tests use 30-day months."""
    return BASE_DATE + timedelta(days=30 * m)


PROCESS = MeasurementLevel.PROCESS
PROJECT = MeasurementLevel.PROJECT
PRODUCT = MeasurementLevel.PRODUCT
I = EvaluationViewpoint.IMPLEMENTER
C = EvaluationViewpoint.COORDINATOR
S = EvaluationViewpoint.SPONSOR


@pytest.fixture
def roles() -> dict[str, StakeholderRole]:
    return {
        r.id: r
        for r in [
            StakeholderRole("dev-team", "development team"),
            StakeholderRole("sepg", "SEPG"),
            StakeholderRole("steering", "SPI steering committee"),
            StakeholderRole("pm", "project manager"),
            StakeholderRole("product-mgr", "product manager"),
            StakeholderRole("head", "head of department"),
        ]
    }


@pytest.fixture
def entities() -> dict[str, TargetEntity]:
    return {
        e.id: e
        for e in [
            TargetEntity("pilot1", "pilot project", EntityKind.PROJECT, Fraction(60)),
            TargetEntity("pilot2", "second pilot", EntityKind.PROJECT, Fraction(40)),
            TargetEntity("productB", "Product B", EntityKind.PRODUCT, Fraction(100)),
        ]
    }


@pytest.fixture
def initiative() -> Initiative:
    """The code-inspections initiative context record (all five items present)."""
    return Initiative(
        id="code-inspections",
        kind="Practice (Code inspections)",
        description=(
            "Systematic peer review of one developer's work product in the "
            "coding phase: planning, preparation, inspection meeting, rework "
            "and follow-up."
        ),
        improvement_goals=("Improve product quality",),
        process_areas=("Coding phase",),
        target_entities=("pilot1", "pilot2"),
        phases=(
            Phase("Phase I: pilot projects", date(2024, 1, 1), date(2024, 6, 30)),
            Phase("Phase II: all projects", date(2024, 7, 1), date(2024, 12, 31)),
        ),
    )


def _ci(level: MeasurementLevel, name: str, kind: IndicatorKind) -> CellIndicator:
    return CellIndicator(find_catalog_indicator(level, name).id, kind)


@pytest.fixture
def goal_scope_assignments() -> list[CellAssignment]:
    """The two-level scope whose derivation yields ten goals MG01..MG10."""
    p, c = IndicatorKind.PRIMARY, IndicatorKind.COMPLEMENTARY
    return [
        CellAssignment(PROCESS, I, ("dev-team",), (_ci(PROCESS, "Effectiveness", p),)),
        CellAssignment(
            PROCESS,
            C,
            ("sepg",),
            (_ci(PROCESS, "Effectiveness", p), _ci(PROCESS, "Efficiency", c)),
        ),
        CellAssignment(PROCESS, S, ("steering",), (_ci(PROCESS, "Effectiveness", p),)),
        CellAssignment(PROJECT, I, ("dev-team",), (_ci(PROJECT, "Defects", p),)),
        CellAssignment(
            PROJECT,
            C,
            ("pm", "sepg"),
            (
                _ci(PROJECT, "Defects", p),
                _ci(PROJECT, "Cost", c),
                _ci(PROJECT, "Productivity", c),
            ),
        ),
        CellAssignment(
            PROJECT,
            S,
            ("steering", "head"),
            (_ci(PROJECT, "Defects", p), _ci(PROJECT, "Cost", c)),
        ),
    ]


@pytest.fixture
def goal_scope(goal_scope_assignments):
    return build_scope_matrix(
        {PROCESS, PROJECT}, goal_scope_assignments, catalog_by_id()
    )


@pytest.fixture
def full_scope_assignments(goal_scope_assignments) -> list[CellAssignment]:
    """Three scoped levels with all nine cells populated (the scoping table)."""
    p, c = IndicatorKind.PRIMARY, IndicatorKind.COMPLEMENTARY
    return goal_scope_assignments + [
        CellAssignment(
            PRODUCT, I, ("dev-team", "pm"), (_ci(PRODUCT, "Quality", p),)
        ),
        CellAssignment(
            PRODUCT,
            C,
            ("product-mgr",),
            (_ci(PRODUCT, "Quality", p), _ci(PRODUCT, "Cost", c)),
        ),
        CellAssignment(
            PRODUCT, S, ("head",), (_ci(PRODUCT, "Time to Market", c),)
        ),
    ]


@pytest.fixture
def full_scope(full_scope_assignments):
    return build_scope_matrix(
        {PROCESS, PROJECT, PRODUCT}, full_scope_assignments, catalog_by_id()
    )


@pytest.fixture
def metrics(roles) -> dict[str, Metric]:
    return {
        m.id: m
        for m in [
            Metric(
                id="pce",
                name="Phase containment effectiveness",
                unit="%",
                direction=MetricDirection.HIGHER_IS_BETTER,
                indicator_id="process.effectiveness",
                evaluator_role="pm",
            ),
            Metric(
                id="dre",
                name="Defect removal efficiency",
                unit="%",
                direction=MetricDirection.HIGHER_IS_BETTER,
                indicator_id="process.efficiency",
                evaluator_role="pm",
            ),
            Metric(
                id="dd",
                name="Defect density",
                unit="defects/KLOC",
                direction=MetricDirection.LOWER_IS_BETTER,
                indicator_id="project.defects",
                evaluator_role="sepg",
            ),
        ]
    }
