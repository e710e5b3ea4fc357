"""Shared domain vocabulary: initiatives, entities, levels, viewpoints, indicators, metrics.

All value types here are immutable and safe to share; mutation happens only
through the project store's serialized write path.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction


class MeasurementLevel(str, Enum):
    """Entity stratum at which improvement effects are measured, ordered."""

    PROCESS = "Process"
    PROJECT = "Project"
    PRODUCT = "Product"
    ORGANIZATION = "Organization"
    EXTERNAL = "External"


LEVELS: tuple[MeasurementLevel, ...] = tuple(MeasurementLevel)


def level_index(level: MeasurementLevel) -> int:
    """Position of a level in the fixed ordering (Process first)."""
    return LEVELS.index(level)


class EvaluationViewpoint(str, Enum):
    """Stakeholder perspective from which an improvement is assessed."""

    IMPLEMENTER = "Implementer"
    COORDINATOR = "Coordinator"
    SPONSOR = "Sponsor"


VIEWPOINTS: tuple[EvaluationViewpoint, ...] = tuple(EvaluationViewpoint)


def viewpoint_index(viewpoint: EvaluationViewpoint) -> int:
    return VIEWPOINTS.index(viewpoint)


class TriangleDimension(str, Enum):
    """Project-management-triangle facet used to pair primary and complementary indicators."""

    COST = "cost"
    TIME = "time"
    QUALITY = "quality"
    OTHER = "other"


class EntityKind(str, Enum):
    PROCESS = "process"
    PROJECT = "project"
    PRODUCT = "product"
    ORGANIZATION_UNIT = "organization-unit"


class MetricDirection(str, Enum):
    HIGHER_IS_BETTER = "higher-is-better"
    LOWER_IS_BETTER = "lower-is-better"


def to_fraction(value: int | float | str | Fraction | Decimal) -> Fraction:
    """Coerce a user-supplied number to an exact rational.

    Floats go through their shortest decimal representation so that "0.1"
    and 0.1 both land on 1/10 rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rational values")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            try:
                return Fraction(Decimal(text))
            except InvalidOperation:
                raise ValueError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def rational_str(value: Fraction) -> str:
    """Canonical string form of a rational ("3", "-7/2")."""
    return str(value)


@dataclass(frozen=True)
class TargetEntity:
    """A process, project, product, or organization unit the initiative targets.

    ``investment_unit`` holds the resources expended on the entity (the
    project's resource unit is declared once, e.g. person-hours); it weights
    the entity's score in cross-entity aggregation.
    """

    id: str
    name: str
    kind: EntityKind
    investment_unit: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.investment_unit < 0:
            raise ValueError(f"investment_unit must be >= 0, got {self.investment_unit}")


@dataclass(frozen=True)
class StakeholderRole:
    """A named organizational role; one role may represent different viewpoints at different levels."""

    id: str
    name: str


@dataclass(frozen=True)
class SuccessIndicator:
    """A measurable aspect of success at one measurement level."""

    id: str
    name: str
    level: MeasurementLevel
    triangle_dimension: TriangleDimension
    catalog_entry: bool = False


@dataclass(frozen=True)
class Metric:
    """A concrete measurement serving exactly one success indicator.

    ``evaluator_role`` names the expert nominated to interpret the metric;
    it must be assigned before any analysis uses the metric.
    """

    id: str
    name: str
    unit: str
    direction: MetricDirection
    indicator_id: str
    evaluator_role: str
    description: str = ""


@dataclass(frozen=True)
class Phase:
    """One planned phase of the initiative's implementation schedule."""

    name: str
    start: date
    end: date


@dataclass(frozen=True)
class Initiative:
    """The improvement under evaluation and its context record.

    Deliberately permissive on construction: :func:`validate_initiative`
    reports missing or inconsistent context fields instead of failing.
    """

    id: str
    kind: str
    description: str
    improvement_goals: tuple[str, ...] = ()
    process_areas: tuple[str, ...] = ()
    target_entities: tuple[str, ...] = ()
    phases: tuple[Phase, ...] = ()


_CATALOG_ROWS: tuple[tuple[MeasurementLevel, str, TriangleDimension], ...] = (
    (MeasurementLevel.PROCESS, "Efficiency", TriangleDimension.COST),
    (MeasurementLevel.PROCESS, "Effectiveness", TriangleDimension.QUALITY),
    (MeasurementLevel.PROJECT, "Defects", TriangleDimension.QUALITY),
    (MeasurementLevel.PROJECT, "Cost", TriangleDimension.COST),
    (MeasurementLevel.PROJECT, "Schedule", TriangleDimension.TIME),
    (MeasurementLevel.PROJECT, "Productivity", TriangleDimension.COST),
    (MeasurementLevel.PROJECT, "Estimation accuracy", TriangleDimension.TIME),
    (MeasurementLevel.PRODUCT, "Quality", TriangleDimension.QUALITY),
    (MeasurementLevel.PRODUCT, "Cost", TriangleDimension.COST),
    (MeasurementLevel.PRODUCT, "Time to Market", TriangleDimension.TIME),
    (MeasurementLevel.ORGANIZATION, "Economics", TriangleDimension.COST),
    (MeasurementLevel.ORGANIZATION, "Employees", TriangleDimension.QUALITY),
    (MeasurementLevel.ORGANIZATION, "Growth", TriangleDimension.OTHER),
    (MeasurementLevel.ORGANIZATION, "Communication", TriangleDimension.OTHER),
    (MeasurementLevel.EXTERNAL, "Customer externalities", TriangleDimension.OTHER),
    (MeasurementLevel.EXTERNAL, "Society externalities", TriangleDimension.OTHER),
)


def _catalog_id(level: MeasurementLevel, name: str) -> str:
    return f"{level.value.lower()}.{name.lower().replace(' ', '-')}"


_CATALOG: tuple[SuccessIndicator, ...] = tuple(
    SuccessIndicator(
        id=_catalog_id(level, name),
        name=name,
        level=level,
        triangle_dimension=dimension,
        catalog_entry=True,
    )
    for level, name, dimension in _CATALOG_ROWS
)


def indicator_catalog() -> tuple[SuccessIndicator, ...]:
    """The built-in success-indicator catalog (16 entries across the five levels)."""
    return _CATALOG


def catalog_by_id() -> dict[str, SuccessIndicator]:
    return {indicator.id: indicator for indicator in _CATALOG}


def find_catalog_indicator(level: MeasurementLevel, name: str) -> SuccessIndicator:
    """Look up a catalog indicator by level and (case-insensitive) name."""
    for indicator in _CATALOG:
        if indicator.level is level and indicator.name.lower() == name.lower():
            return indicator
    raise KeyError(f"no catalog indicator {name!r} at level {level.value}")


def validate_initiative(initiative: Initiative) -> list[str]:
    """Report missing or inconsistent context fields; empty list means complete.

    Checks the five context items (description, improvement goals, process
    areas, target entities, implementation schedule) plus phase-date
    consistency. Pure: identical inputs yield identical reports.
    """
    report: list[str] = []
    if not initiative.description.strip():
        report.append("missing description of the initiative and its purpose")
    if not initiative.improvement_goals:
        report.append("missing improvement goal")
    if not initiative.process_areas:
        report.append("missing process area")
    if not initiative.target_entities:
        report.append("missing target entity")
    if not initiative.phases:
        report.append("missing implementation schedule (no phases)")
    for phase in initiative.phases:
        if phase.end < phase.start:
            report.append(
                f"phase {phase.name!r} date ordering violation: "
                f"end {phase.end.isoformat()} before start {phase.start.isoformat()}"
            )
    for earlier, later in zip(initiative.phases, initiative.phases[1:]):
        if later.start < earlier.end:
            report.append(
                f"phases {earlier.name!r} and {later.name!r} overlap: "
                f"{later.name!r} starts {later.start.isoformat()} before "
                f"{earlier.name!r} ends {earlier.end.isoformat()}"
            )
    return report
