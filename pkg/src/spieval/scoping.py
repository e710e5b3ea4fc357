"""Gap analysis of evaluation quality and the level-by-viewpoint scope matrix."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    EvaluationViewpoint,
    MeasurementLevel,
    SuccessIndicator,
    VIEWPOINTS,
    level_index,
    viewpoint_index,
)
from .errors import DuplicateCellError, ScopeViolationError


class QualityRating(str, Enum):
    """The two-point scale of the evaluation-quality matrix."""

    LOW = "low"
    HIGH = "high"


class BudgetHint(str, Enum):
    CONSTRAINED = "constrained"
    AMPLE = "ample"


Quadrant = tuple[QualityRating, QualityRating]  # (accuracy, coverage)


@dataclass(frozen=True)
class OpportunityAssessment:
    """A chosen path through the accuracy/coverage matrix, with per-step cost notes.

    ``path`` includes the starting quadrant; it is empty when current equals
    target. ``simultaneous`` marks an ample-budget diagonal move that is
    recorded as two ordered sub-steps (accuracy first).
    """

    current_accuracy: QualityRating
    current_coverage: QualityRating
    target_accuracy: QualityRating
    target_coverage: QualityRating
    path: tuple[Quadrant, ...]
    cost_estimate_per_step: tuple[Fraction, ...] = ()
    simultaneous: bool = False
    rationale: str = ""

    @property
    def transitions(self) -> int:
        return max(len(self.path) - 1, 0)

    def __post_init__(self) -> None:
        if self.path:
            if self.path[0] != (self.current_accuracy, self.current_coverage):
                raise ValueError("path must start at the current quadrant")
            if self.path[-1] != (self.target_accuracy, self.target_coverage):
                raise ValueError("path must end at the target quadrant")
            for a, b in zip(self.path, self.path[1:]):
                changed = (a[0] != b[0]) + (a[1] != b[1])
                if changed != 1:
                    raise ValueError(f"step {a} -> {b} must change exactly one dimension")
        if len(self.cost_estimate_per_step) != self.transitions:
            raise ValueError(
                f"cost estimates ({len(self.cost_estimate_per_step)}) must match "
                f"transition count ({self.transitions})"
            )
        for cost in self.cost_estimate_per_step:
            if cost < 0:
                raise ValueError("step cost estimates must be non-negative")


def assess_gap(
    current: Quadrant,
    target: Quadrant,
    budget_hint: BudgetHint | None = None,
    step_costs: Sequence[Fraction] | None = None,
    rationale: str = "",
) -> OpportunityAssessment:
    """Plan a path from the current to the aspired evaluation quality.

    Each step changes one dimension. When both dimensions change, the
    accuracy step comes first; an ample budget allows targeting both at once,
    still recorded as two ordered sub-steps.
    """
    cur_acc, cur_cov = current
    tgt_acc, tgt_cov = target

    path: list[Quadrant] = []
    if current != target:
        path.append(current)
        if tgt_acc != cur_acc:
            path.append((tgt_acc, cur_cov))
        if tgt_cov != cur_cov:
            path.append((tgt_acc, tgt_cov))

    simultaneous = (
        budget_hint is BudgetHint.AMPLE and tgt_acc != cur_acc and tgt_cov != cur_cov
    )
    transitions = max(len(path) - 1, 0)
    costs = tuple(step_costs) if step_costs is not None else (Fraction(0),) * transitions
    return OpportunityAssessment(
        current_accuracy=cur_acc,
        current_coverage=cur_cov,
        target_accuracy=tgt_acc,
        target_coverage=tgt_cov,
        path=tuple(path),
        cost_estimate_per_step=costs,
        simultaneous=simultaneous,
        rationale=rationale,
    )


class IndicatorKind(str, Enum):
    """Whether an indicator tracks the improvement goal or its side-effects."""

    PRIMARY = "primary"
    COMPLEMENTARY = "complementary"


@dataclass(frozen=True)
class CellIndicator:
    indicator_id: str
    kind: IndicatorKind


@dataclass(frozen=True)
class ScopeCell:
    """Content of one (level, viewpoint) cell: interested roles plus their indicators."""

    roles: tuple[str, ...]
    indicators: tuple[CellIndicator, ...]


@dataclass(frozen=True)
class CellAssignment:
    """Input row for building the scope matrix."""

    level: MeasurementLevel
    viewpoint: EvaluationViewpoint
    roles: tuple[str, ...]
    indicators: tuple[CellIndicator, ...]


@dataclass(frozen=True)
class ScopeMatrix:
    """Measurement-level by evaluation-viewpoint grid of evaluation responsibilities."""

    levels: frozenset[MeasurementLevel]
    cells: Mapping[tuple[MeasurementLevel, EvaluationViewpoint], ScopeCell]

    def sorted_cells(
        self,
    ) -> list[tuple[tuple[MeasurementLevel, EvaluationViewpoint], ScopeCell]]:
        """Cells in the canonical (level order, viewpoint order)."""
        return sorted(
            self.cells.items(),
            key=lambda item: (level_index(item[0][0]), viewpoint_index(item[0][1])),
        )

    def scoped_levels(self) -> list[MeasurementLevel]:
        return sorted(self.levels, key=level_index)

    @property
    def is_empty(self) -> bool:
        return not self.cells


def build_scope_matrix(
    levels: Iterable[MeasurementLevel],
    assignments: Sequence[CellAssignment],
    indicators: Mapping[str, SuccessIndicator] | None = None,
) -> ScopeMatrix:
    """Assemble the scope matrix, rejecting out-of-scope levels and duplicate cells.

    When an ``indicators`` registry is supplied, each assigned indicator must
    exist and live at the cell's level.
    """
    scoped = frozenset(levels)
    cells: dict[tuple[MeasurementLevel, EvaluationViewpoint], ScopeCell] = {}
    for assignment in assignments:
        if assignment.level not in scoped:
            raise ScopeViolationError(
                f"assignment targets level {assignment.level.value} outside the "
                f"scoped levels {sorted(l.value for l in scoped)}"
            )
        key = (assignment.level, assignment.viewpoint)
        if key in cells:
            raise DuplicateCellError(
                f"duplicate assignment for ({assignment.level.value}, "
                f"{assignment.viewpoint.value})"
            )
        if not assignment.roles:
            raise ScopeViolationError(
                f"cell ({assignment.level.value}, {assignment.viewpoint.value}) "
                "must name at least one stakeholder role"
            )
        if indicators is not None:
            for cell_indicator in assignment.indicators:
                resolved = indicators.get(cell_indicator.indicator_id)
                if resolved is None:
                    raise ScopeViolationError(
                        f"unknown success indicator {cell_indicator.indicator_id!r}"
                    )
                if resolved.level is not assignment.level:
                    raise ScopeViolationError(
                        f"indicator {resolved.id!r} lives at level "
                        f"{resolved.level.value}, not {assignment.level.value}"
                    )
        cells[key] = ScopeCell(
            roles=tuple(assignment.roles), indicators=tuple(assignment.indicators)
        )
    return ScopeMatrix(levels=scoped, cells=cells)


@dataclass(frozen=True)
class ScopeCoverageReport:
    """Gaps in the declared evaluation scope.

    ``holistic`` is true when every scoped level carries all three
    viewpoints; incompleteness is a warning, not an error.
    """

    empty_cells: tuple[tuple[MeasurementLevel, EvaluationViewpoint], ...]
    missing_viewpoints: tuple[tuple[MeasurementLevel, EvaluationViewpoint], ...]
    levels_without_primary: tuple[MeasurementLevel, ...]
    holistic: bool
    nothing_scoped: bool = False

    @property
    def is_clean(self) -> bool:
        return not (
            self.empty_cells
            or self.missing_viewpoints
            or self.levels_without_primary
            or self.nothing_scoped
        )

    def lines(self) -> list[str]:
        out: list[str] = []
        if self.nothing_scoped:
            out.append("nothing is scoped yet: the scope matrix is empty")
        for level, viewpoint in self.empty_cells:
            out.append(f"cell ({level.value}, {viewpoint.value}) is scoped but has no indicators")
        for level, viewpoint in self.missing_viewpoints:
            out.append(f"viewpoint {viewpoint.value} is absent from scoped level {level.value}")
        for level in self.levels_without_primary:
            out.append(f"no primary indicator at {level.value}")
        if not self.holistic and not self.nothing_scoped:
            out.append("scope is not holistic: some scoped level lacks a viewpoint")
        return out


def scope_coverage_report(matrix: ScopeMatrix) -> ScopeCoverageReport:
    """Flag scoped-but-empty cells, absent viewpoints, and levels lacking a primary indicator."""
    empty_cells: list[tuple[MeasurementLevel, EvaluationViewpoint]] = []
    missing_viewpoints: list[tuple[MeasurementLevel, EvaluationViewpoint]] = []
    levels_without_primary: list[MeasurementLevel] = []

    for level in matrix.scoped_levels():
        has_primary = False
        for viewpoint in VIEWPOINTS:
            cell = matrix.cells.get((level, viewpoint))
            if cell is None:
                missing_viewpoints.append((level, viewpoint))
                continue
            if not cell.indicators:
                empty_cells.append((level, viewpoint))
            if any(ci.kind is IndicatorKind.PRIMARY for ci in cell.indicators):
                has_primary = True
        if not has_primary:
            levels_without_primary.append(level)

    return ScopeCoverageReport(
        empty_cells=tuple(empty_cells),
        missing_viewpoints=tuple(missing_viewpoints),
        levels_without_primary=tuple(levels_without_primary),
        holistic=bool(matrix.cells) and not missing_viewpoints,
        nothing_scoped=matrix.is_empty,
    )
