"""Gap-analysis paths and the scope matrix."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spieval.core import EvaluationViewpoint, MeasurementLevel, catalog_by_id
from spieval.errors import DuplicateCellError, ScopeViolationError
from spieval.scoping import (
    BudgetHint,
    CellAssignment,
    CellIndicator,
    IndicatorKind,
    QualityRating,
    assess_gap,
    build_scope_matrix,
    scope_coverage_report,
)
from spieval.store import dec_scope, enc_scope

LOW = QualityRating.LOW
HIGH = QualityRating.HIGH

# Hand enumeration of all 16 (current, target) combinations. Paths include the
# start quadrant; one dimension changes per step; accuracy moves first.
EXPECTED_PATHS = {
    ((LOW, LOW), (LOW, LOW)): (),
    ((LOW, LOW), (LOW, HIGH)): ((LOW, LOW), (LOW, HIGH)),
    ((LOW, LOW), (HIGH, LOW)): ((LOW, LOW), (HIGH, LOW)),
    ((LOW, LOW), (HIGH, HIGH)): ((LOW, LOW), (HIGH, LOW), (HIGH, HIGH)),
    ((LOW, HIGH), (LOW, LOW)): ((LOW, HIGH), (LOW, LOW)),
    ((LOW, HIGH), (LOW, HIGH)): (),
    ((LOW, HIGH), (HIGH, LOW)): ((LOW, HIGH), (HIGH, HIGH), (HIGH, LOW)),
    ((LOW, HIGH), (HIGH, HIGH)): ((LOW, HIGH), (HIGH, HIGH)),
    ((HIGH, LOW), (LOW, LOW)): ((HIGH, LOW), (LOW, LOW)),
    ((HIGH, LOW), (LOW, HIGH)): ((HIGH, LOW), (LOW, LOW), (LOW, HIGH)),
    ((HIGH, LOW), (HIGH, LOW)): (),
    ((HIGH, LOW), (HIGH, HIGH)): ((HIGH, LOW), (HIGH, HIGH)),
    ((HIGH, HIGH), (LOW, LOW)): ((HIGH, HIGH), (LOW, HIGH), (LOW, LOW)),
    ((HIGH, HIGH), (LOW, HIGH)): ((HIGH, HIGH), (LOW, HIGH)),
    ((HIGH, HIGH), (HIGH, LOW)): ((HIGH, HIGH), (HIGH, LOW)),
    ((HIGH, HIGH), (HIGH, HIGH)): (),
}


@pytest.mark.parametrize("current,target", list(EXPECTED_PATHS))
def test_assess_gap_paths_match_hand_enumeration(current, target):
    assessment = assess_gap(current, target)
    assert assessment.path == EXPECTED_PATHS[(current, target)]


def test_accuracy_first_when_both_rise_and_budget_constrained():
    for hint in (None, BudgetHint.CONSTRAINED):
        assessment = assess_gap((LOW, LOW), (HIGH, HIGH), budget_hint=hint)
        assert assessment.path == ((LOW, LOW), (HIGH, LOW), (HIGH, HIGH))
        first_step_changes_accuracy = assessment.path[0][0] != assessment.path[1][0]
        assert first_step_changes_accuracy
        assert not assessment.simultaneous


def test_ample_budget_records_simultaneous_diagonal_as_two_substeps():
    assessment = assess_gap((LOW, LOW), (HIGH, HIGH), budget_hint=BudgetHint.AMPLE)
    assert assessment.simultaneous
    assert assessment.path == ((LOW, LOW), (HIGH, LOW), (HIGH, HIGH))


def test_identity_gap_has_empty_path():
    assessment = assess_gap((LOW, HIGH), (LOW, HIGH))
    assert assessment.path == ()
    assert assessment.transitions == 0


def test_single_dimension_delta_is_one_step():
    assessment = assess_gap((LOW, HIGH), (HIGH, HIGH))
    assert assessment.path == ((LOW, HIGH), (HIGH, HIGH))
    assert assessment.transitions == 1


@pytest.mark.parametrize("current,target", list(EXPECTED_PATHS))
def test_every_step_changes_exactly_one_dimension(current, target):
    path = assess_gap(current, target).path
    for a, b in zip(path, path[1:]):
        assert ((a[0] != b[0]) + (a[1] != b[1])) == 1


def test_step_costs_length_must_match_transitions():
    assessment = assess_gap(
        (LOW, LOW), (HIGH, HIGH), step_costs=[Fraction(100), Fraction(50)]
    )
    assert assessment.cost_estimate_per_step == (Fraction(100), Fraction(50))
    with pytest.raises(ValueError):
        assess_gap((LOW, LOW), (HIGH, HIGH), step_costs=[Fraction(100)])
    with pytest.raises(ValueError):
        assess_gap((LOW, LOW), (HIGH, LOW), step_costs=[Fraction(-1)])


def test_build_scope_matrix_nine_cells(full_scope):
    assert len(full_scope.cells) == 9
    assert full_scope.levels == {
        MeasurementLevel.PROCESS,
        MeasurementLevel.PROJECT,
        MeasurementLevel.PRODUCT,
    }
    cell = full_scope.cells[(MeasurementLevel.PROCESS, EvaluationViewpoint.IMPLEMENTER)]
    assert cell.roles == ("dev-team",)


def test_build_scope_matrix_empty():
    matrix = build_scope_matrix(set(), [])
    assert matrix.is_empty


def test_assignment_outside_scoped_levels_rejected():
    assignment = CellAssignment(
        MeasurementLevel.ORGANIZATION,
        EvaluationViewpoint.IMPLEMENTER,
        ("dev-team",),
        (),
    )
    with pytest.raises(ScopeViolationError):
        build_scope_matrix({MeasurementLevel.PROCESS}, [assignment])


def test_duplicate_cell_rejected():
    assignment = CellAssignment(
        MeasurementLevel.PROCESS, EvaluationViewpoint.IMPLEMENTER, ("dev-team",), ()
    )
    with pytest.raises(DuplicateCellError):
        build_scope_matrix({MeasurementLevel.PROCESS}, [assignment, assignment])


def test_cell_requires_a_role():
    assignment = CellAssignment(
        MeasurementLevel.PROCESS, EvaluationViewpoint.IMPLEMENTER, (), ()
    )
    with pytest.raises(ScopeViolationError):
        build_scope_matrix({MeasurementLevel.PROCESS}, [assignment])


def test_indicator_level_must_match_cell_level():
    assignment = CellAssignment(
        MeasurementLevel.PROCESS,
        EvaluationViewpoint.IMPLEMENTER,
        ("dev-team",),
        (CellIndicator("project.defects", IndicatorKind.PRIMARY),),
    )
    with pytest.raises(ScopeViolationError):
        build_scope_matrix({MeasurementLevel.PROCESS}, [assignment], catalog_by_id())


def test_scope_round_trips_through_persistence_format(full_scope):
    assert dec_scope(enc_scope(full_scope)) == full_scope


def test_coverage_report_full_matrix_has_no_missing_viewpoints(full_scope):
    report = scope_coverage_report(full_scope)
    assert report.missing_viewpoints == ()
    assert report.holistic


def test_coverage_report_flags_missing_sponsor():
    assignments = [
        CellAssignment(
            MeasurementLevel.PROCESS,
            EvaluationViewpoint.IMPLEMENTER,
            ("dev-team",),
            (CellIndicator("process.effectiveness", IndicatorKind.PRIMARY),),
        ),
        CellAssignment(
            MeasurementLevel.PROCESS,
            EvaluationViewpoint.COORDINATOR,
            ("sepg",),
            (CellIndicator("process.efficiency", IndicatorKind.COMPLEMENTARY),),
        ),
    ]
    matrix = build_scope_matrix({MeasurementLevel.PROCESS}, assignments, catalog_by_id())
    report = scope_coverage_report(matrix)
    assert (MeasurementLevel.PROCESS, EvaluationViewpoint.SPONSOR) in report.missing_viewpoints
    assert not report.holistic


def test_coverage_report_flags_level_without_primary():
    assignments = [
        CellAssignment(
            MeasurementLevel.PROJECT,
            EvaluationViewpoint.COORDINATOR,
            ("pm",),
            (CellIndicator("project.cost", IndicatorKind.COMPLEMENTARY),),
        ),
    ]
    matrix = build_scope_matrix({MeasurementLevel.PROJECT}, assignments, catalog_by_id())
    report = scope_coverage_report(matrix)
    assert report.levels_without_primary == (MeasurementLevel.PROJECT,)
    assert any("no primary indicator at Project" in line for line in report.lines())


def test_coverage_report_on_empty_matrix_warns_nothing_scoped():
    report = scope_coverage_report(build_scope_matrix(set(), []))
    assert report.nothing_scoped
    assert not report.is_clean
    assert not report.holistic
    assert any("nothing is scoped" in line for line in report.lines())


def test_coverage_report_flags_scoped_but_empty_cell():
    assignments = [
        CellAssignment(
            MeasurementLevel.PROCESS, EvaluationViewpoint.IMPLEMENTER, ("dev-team",), ()
        ),
    ]
    matrix = build_scope_matrix({MeasurementLevel.PROCESS}, assignments)
    report = scope_coverage_report(matrix)
    assert (MeasurementLevel.PROCESS, EvaluationViewpoint.IMPLEMENTER) in report.empty_cells


quadrants = st.tuples(
    st.sampled_from([LOW, HIGH]), st.sampled_from([LOW, HIGH])
)


@given(current=quadrants, target=quadrants, hint=st.sampled_from([None, *BudgetHint]))
def test_path_validity_property(current, target, hint):
    assessment = assess_gap(current, target, budget_hint=hint)
    path = assessment.path
    if current == target:
        assert path == ()
    else:
        assert path[0] == current and path[-1] == target
        for a, b in zip(path, path[1:]):
            assert ((a[0] != b[0]) + (a[1] != b[1])) == 1
    if current[0] != target[0] and current[1] != target[1]:
        assert path[1][0] == target[0] and path[1][1] == current[1]
