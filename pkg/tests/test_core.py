"""Core vocabulary: indicator catalog, initiative validation, rational coercion."""

from __future__ import annotations

from datetime import date
from fractions import Fraction

import pytest

from spieval.core import (
    EntityKind,
    Initiative,
    MeasurementLevel,
    Phase,
    TargetEntity,
    TriangleDimension,
    find_catalog_indicator,
    indicator_catalog,
    level_index,
    to_fraction,
    validate_initiative,
)

# The built-in catalog, written out row by row (level, name) — the test's own
# source of truth, independent of the implementation's table.
CATALOG_ROWS = {
    ("Process", "Efficiency"),
    ("Process", "Effectiveness"),
    ("Project", "Defects"),
    ("Project", "Cost"),
    ("Project", "Schedule"),
    ("Project", "Productivity"),
    ("Project", "Estimation accuracy"),
    ("Product", "Quality"),
    ("Product", "Cost"),
    ("Product", "Time to Market"),
    ("Organization", "Economics"),
    ("Organization", "Employees"),
    ("Organization", "Growth"),
    ("Organization", "Communication"),
    ("External", "Customer externalities"),
    ("External", "Society externalities"),
}


def test_catalog_matches_reference_rows_exactly():
    catalog = indicator_catalog()
    assert len(catalog) == 16
    assert {(i.level.value, i.name) for i in catalog} == CATALOG_ROWS
    assert all(i.catalog_entry for i in catalog)


def test_catalog_level_queries():
    by_level = lambda level: {
        i.name for i in indicator_catalog() if i.level is level
    }
    assert by_level(MeasurementLevel.PROCESS) == {"Efficiency", "Effectiveness"}
    assert by_level(MeasurementLevel.EXTERNAL) == {
        "Customer externalities",
        "Society externalities",
    }


def test_catalog_triangle_dimensions():
    expected = {
        ("Process", "Efficiency"): TriangleDimension.COST,
        ("Process", "Effectiveness"): TriangleDimension.QUALITY,
        ("Project", "Defects"): TriangleDimension.QUALITY,
        ("Project", "Cost"): TriangleDimension.COST,
        ("Project", "Schedule"): TriangleDimension.TIME,
        ("Project", "Productivity"): TriangleDimension.COST,
        ("Project", "Estimation accuracy"): TriangleDimension.TIME,
        ("Product", "Quality"): TriangleDimension.QUALITY,
        ("Product", "Cost"): TriangleDimension.COST,
        ("Product", "Time to Market"): TriangleDimension.TIME,
        ("Organization", "Economics"): TriangleDimension.COST,
        ("Organization", "Employees"): TriangleDimension.QUALITY,
        ("Organization", "Growth"): TriangleDimension.OTHER,
        ("Organization", "Communication"): TriangleDimension.OTHER,
        ("External", "Customer externalities"): TriangleDimension.OTHER,
        ("External", "Society externalities"): TriangleDimension.OTHER,
    }
    for indicator in indicator_catalog():
        assert indicator.triangle_dimension is expected[(indicator.level.value, indicator.name)]


def test_catalog_is_immutable_tuple():
    assert isinstance(indicator_catalog(), tuple)
    assert indicator_catalog() is indicator_catalog()


def test_find_catalog_indicator():
    efficiency = find_catalog_indicator(MeasurementLevel.PROCESS, "efficiency")
    assert efficiency.name == "Efficiency"
    with pytest.raises(KeyError):
        find_catalog_indicator(MeasurementLevel.PROCESS, "Defects")


def test_level_ordering_is_fixed():
    order = [lv.value for lv in MeasurementLevel]
    assert order == ["Process", "Project", "Product", "Organization", "External"]
    assert level_index(MeasurementLevel.PROCESS) == 0
    assert level_index(MeasurementLevel.EXTERNAL) == 4


def test_validate_complete_record_is_clean(initiative):
    assert validate_initiative(initiative) == []


def test_validate_missing_improvement_goal(initiative):
    record = Initiative(
        id=initiative.id,
        kind=initiative.kind,
        description=initiative.description,
        improvement_goals=(),
        process_areas=initiative.process_areas,
        target_entities=initiative.target_entities,
        phases=initiative.phases,
    )
    report = validate_initiative(record)
    assert any("missing improvement goal" in item for item in report)


def test_validate_phase_end_before_start():
    record = Initiative(
        id="x",
        kind="Practice",
        description="something",
        improvement_goals=("g",),
        process_areas=("a",),
        target_entities=("e",),
        phases=(Phase("bad", date(2024, 6, 1), date(2024, 1, 1)),),
    )
    report = validate_initiative(record)
    assert any("date ordering" in item for item in report)


def test_validate_overlapping_phases():
    record = Initiative(
        id="x",
        kind="Practice",
        description="something",
        improvement_goals=("g",),
        process_areas=("a",),
        target_entities=("e",),
        phases=(
            Phase("one", date(2024, 1, 1), date(2024, 6, 1)),
            Phase("two", date(2024, 5, 1), date(2024, 9, 1)),
        ),
    )
    assert any("overlap" in item for item in validate_initiative(record))


def test_validate_reports_every_missing_field():
    empty = Initiative(id="x", kind="", description="")
    report = validate_initiative(empty)
    for needle in (
        "missing description",
        "missing improvement goal",
        "missing process area",
        "missing target entity",
        "missing implementation schedule",
    ):
        assert any(needle in item for item in report), needle


def test_validate_is_pure(initiative):
    assert validate_initiative(initiative) == validate_initiative(initiative)


def test_entity_rejects_negative_investment():
    with pytest.raises(ValueError):
        TargetEntity("e", "e", EntityKind.PROJECT, Fraction(-1))


@pytest.mark.parametrize(
    "raw, expected",
    [
        (3, Fraction(3)),
        ("3/7", Fraction(3, 7)),
        ("0.1", Fraction(1, 10)),
        (0.1, Fraction(1, 10)),
        ("-2.5", Fraction(-5, 2)),
        ("1e-3", Fraction(1, 1000)),
        (Fraction(9, 4), Fraction(9, 4)),
    ],
)
def test_to_fraction_exact(raw, expected):
    assert to_fraction(raw) == expected


def test_to_fraction_rejects_garbage():
    with pytest.raises(ValueError):
        to_fraction("not-a-number")
    with pytest.raises(TypeError):
        to_fraction(None)
