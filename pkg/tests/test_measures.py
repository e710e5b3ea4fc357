"""Measurement-goal derivation, statements, complementary coverage, GQM trees."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spieval.core import (
    EvaluationViewpoint,
    MeasurementLevel,
    MetricDirection,
    catalog_by_id,
    find_catalog_indicator,
)
from spieval.errors import LinkageError, NothingToDeriveError
from spieval.measures import (
    attach_gqm_tree,
    check_complementary_coverage,
    derive_measurement_goals,
    metric_pool,
    render_goal_statement,
)
from spieval.scoping import (
    CellAssignment,
    CellIndicator,
    IndicatorKind,
    ScopeMatrix,
    build_scope_matrix,
)

PROCESS = MeasurementLevel.PROCESS
PROJECT = MeasurementLevel.PROJECT
PRODUCT = MeasurementLevel.PRODUCT
I = EvaluationViewpoint.IMPLEMENTER
C = EvaluationViewpoint.COORDINATOR
S = EvaluationViewpoint.SPONSOR

# The ten goals the two-level worked scope must yield, in table order:
# levels outer, viewpoints middle, indicators in cell order.
EXPECTED_GOAL_TABLE = [
    ("MG01", PROCESS, I, "process.effectiveness"),
    ("MG02", PROCESS, C, "process.effectiveness"),
    ("MG03", PROCESS, C, "process.efficiency"),
    ("MG04", PROCESS, S, "process.effectiveness"),
    ("MG05", PROJECT, I, "project.defects"),
    ("MG06", PROJECT, C, "project.defects"),
    ("MG07", PROJECT, C, "project.cost"),
    ("MG08", PROJECT, C, "project.productivity"),
    ("MG09", PROJECT, S, "project.defects"),
    ("MG10", PROJECT, S, "project.cost"),
]


def _derive(initiative, matrix, roles, entities, **kwargs):
    return derive_measurement_goals(
        initiative,
        matrix,
        indicators=catalog_by_id(),
        roles=roles,
        entities=entities,
        **kwargs,
    )


def test_ten_goals_in_table_order(initiative, goal_scope, roles, entities):
    goals = _derive(initiative, goal_scope, roles, entities)
    assert [(g.id, g.level, g.viewpoint, g.indicator_id) for g in goals] == EXPECTED_GOAL_TABLE
    assert all(g.purpose == "evaluate" for g in goals)


def test_goal_statement_names_the_four_facets(initiative, goal_scope, roles, entities):
    goals = _derive(
        initiative,
        goal_scope,
        roles,
        entities,
        object_label="process of code inspections",
    )
    statement = render_goal_statement(goals[0]).lower()
    for needle in ("code inspections", "effectiveness", "pilot project", "development team"):
        assert needle in statement, needle


def test_statement_joins_multiple_context_entities(initiative, goal_scope, roles, entities):
    goals = _derive(initiative, goal_scope, roles, entities)
    statement = render_goal_statement(goals[0])
    assert "pilot project, second pilot" in statement


def test_rendering_is_deterministic(initiative, goal_scope, roles, entities):
    goals = _derive(initiative, goal_scope, roles, entities)
    assert render_goal_statement(goals[3]) == render_goal_statement(goals[3])


def test_derivation_is_order_stable(initiative, goal_scope, roles, entities):
    first = _derive(initiative, goal_scope, roles, entities)
    second = _derive(initiative, goal_scope, roles, entities)
    assert first == second


def test_single_cell_single_indicator_yields_one_goal(initiative, roles, entities):
    matrix = build_scope_matrix(
        {PROCESS},
        [
            CellAssignment(
                PROCESS,
                I,
                ("dev-team",),
                (CellIndicator("process.effectiveness", IndicatorKind.PRIMARY),),
            )
        ],
        catalog_by_id(),
    )
    goals = _derive(initiative, matrix, roles, entities)
    assert [g.id for g in goals] == ["MG01"]


def test_adding_product_level_with_two_indicators_yields_twelve(
    initiative, goal_scope_assignments, roles, entities
):
    assignments = goal_scope_assignments + [
        CellAssignment(
            PRODUCT,
            C,
            ("product-mgr",),
            (
                CellIndicator("product.quality", IndicatorKind.PRIMARY),
                CellIndicator("product.cost", IndicatorKind.COMPLEMENTARY),
            ),
        )
    ]
    matrix = build_scope_matrix({PROCESS, PROJECT, PRODUCT}, assignments, catalog_by_id())
    goals = _derive(initiative, matrix, roles, entities)
    assert len(goals) == 12
    assert goals[-1].id == "MG12"


def test_empty_matrix_raises_nothing_to_derive(initiative, roles, entities):
    with pytest.raises(NothingToDeriveError):
        _derive(initiative, ScopeMatrix(frozenset(), {}), roles, entities)


@given(data=st.data())
def test_goal_count_equals_sum_of_cell_indicators(data):
    from spieval.core import Initiative

    initiative = Initiative(
        id="x", kind="Practice", description="d", target_entities=("e1",)
    )
    roles: dict = {}
    entities: dict = {}
    catalog = list(catalog_by_id().values())
    assignments = []
    expected = 0
    levels = set()
    for level in MeasurementLevel:
        for viewpoint in EvaluationViewpoint:
            include = data.draw(st.booleans())
            if not include:
                continue
            candidates = [i for i in catalog if i.level is level]
            chosen = data.draw(
                st.lists(st.sampled_from(candidates), max_size=3, unique_by=lambda i: i.id)
            )
            assignments.append(
                CellAssignment(
                    level,
                    viewpoint,
                    ("dev-team",),
                    tuple(CellIndicator(i.id, IndicatorKind.PRIMARY) for i in chosen),
                )
            )
            levels.add(level)
            expected += len(chosen)
    if not assignments:
        return
    matrix = build_scope_matrix(levels, assignments, catalog_by_id())
    goals = _derive(initiative, matrix, roles, entities)
    assert len(goals) == expected
    assert [g.id for g in goals] == [f"MG{k:02d}" for k in range(1, expected + 1)]


def _matrix_with(assignments, levels):
    return build_scope_matrix(levels, assignments, catalog_by_id())


def test_primary_cost_with_quality_complement_is_clean():
    matrix = _matrix_with(
        [
            CellAssignment(
                PROJECT,
                C,
                ("pm",),
                (
                    CellIndicator("project.cost", IndicatorKind.PRIMARY),
                    CellIndicator("project.defects", IndicatorKind.COMPLEMENTARY),
                ),
            )
        ],
        {PROJECT},
    )
    report = check_complementary_coverage(matrix, catalog_by_id())
    assert report.is_clean


def test_primary_cost_with_only_cost_dimension_complement_violates():
    # Productivity shares the cost dimension, so it cannot counterweight Cost.
    matrix = _matrix_with(
        [
            CellAssignment(
                PROJECT,
                C,
                ("pm",),
                (
                    CellIndicator("project.cost", IndicatorKind.PRIMARY),
                    CellIndicator("project.productivity", IndicatorKind.COMPLEMENTARY),
                ),
            )
        ],
        {PROJECT},
    )
    report = check_complementary_coverage(matrix, catalog_by_id())
    assert len(report.violations) == 1
    assert report.violations[0].indicator_id == "project.cost"


def test_complement_found_across_viewpoints_at_same_level():
    matrix = _matrix_with(
        [
            CellAssignment(
                PROJECT,
                I,
                ("dev-team",),
                (CellIndicator("project.defects", IndicatorKind.PRIMARY),),
            ),
            CellAssignment(
                PROJECT,
                C,
                ("pm",),
                (CellIndicator("project.cost", IndicatorKind.COMPLEMENTARY),),
            ),
        ],
        {PROJECT},
    )
    assert check_complementary_coverage(matrix, catalog_by_id()).is_clean


def test_no_primaries_yields_empty_report():
    matrix = _matrix_with(
        [
            CellAssignment(
                PROJECT,
                C,
                ("pm",),
                (CellIndicator("project.cost", IndicatorKind.COMPLEMENTARY),),
            )
        ],
        {PROJECT},
    )
    assert check_complementary_coverage(matrix, catalog_by_id()).violations == ()


def test_goal_scope_fixture_is_fully_complemented(goal_scope):
    assert check_complementary_coverage(goal_scope, catalog_by_id()).is_clean


@given(data=st.data())
def test_adding_a_complement_never_creates_violations(data):
    catalog = catalog_by_id()
    base_pairs = [
        ("project.cost", "project.productivity"),
        ("project.defects", "project.cost"),
        ("process.effectiveness", "process.efficiency"),
    ]
    primary_id, complement_id = data.draw(st.sampled_from(base_pairs))
    level = catalog[primary_id].level
    base = _matrix_with(
        [
            CellAssignment(
                level,
                C,
                ("pm",),
                (CellIndicator(primary_id, IndicatorKind.PRIMARY),),
            )
        ],
        {level},
    )
    before = check_complementary_coverage(base, catalog)
    extended = _matrix_with(
        [
            CellAssignment(
                level,
                C,
                ("pm",),
                (
                    CellIndicator(primary_id, IndicatorKind.PRIMARY),
                    CellIndicator(complement_id, IndicatorKind.COMPLEMENTARY),
                ),
            )
        ],
        {level},
    )
    after = check_complementary_coverage(extended, catalog)
    assert len(after.violations) <= len(before.violations)


def test_attach_gqm_tree_round_trip(initiative, goal_scope, roles, entities, metrics):
    goals = _derive(initiative, goal_scope, roles, entities)
    tree = attach_gqm_tree(
        goals[0],
        [("what is the phase containment effectiveness?", ["pce"])],
        metrics,
    )
    assert tree.goal_id == "MG01"
    assert tree.questions[0].metric_ids == ("pce",)


def test_attach_gqm_tree_rejects_foreign_indicator_metric(
    initiative, goal_scope, roles, entities, metrics
):
    goals = _derive(initiative, goal_scope, roles, entities)
    # dd serves project.defects, not the MG01 focus (process effectiveness)
    with pytest.raises(LinkageError):
        attach_gqm_tree(goals[0], [("q", ["dd"])], metrics)


def test_attach_gqm_tree_rejects_unknown_metric(
    initiative, goal_scope, roles, entities, metrics
):
    goals = _derive(initiative, goal_scope, roles, entities)
    with pytest.raises(LinkageError):
        attach_gqm_tree(goals[0], [("q", ["ghost"])], metrics)


def test_attach_empty_gqm_tree_allowed(initiative, goal_scope, roles, entities, metrics):
    goals = _derive(initiative, goal_scope, roles, entities)
    tree = attach_gqm_tree(goals[0], [], metrics)
    assert tree.questions == ()


def test_metric_pool_covers_known_indicators():
    pool = metric_pool()
    catalog_ids = set(catalog_by_id())
    assert set(pool) <= catalog_ids
    assert len(pool) == 16
    for templates in pool.values():
        assert templates
        for template in templates:
            assert isinstance(template.direction, MetricDirection)
            assert template.name and template.unit


def test_metric_pool_loads_from_custom_path(tmp_path):
    custom = tmp_path / "pool.json"
    custom.write_text(
        '{"process.efficiency": [{"name": "x", "unit": "u", "direction": "lower-is-better"}]}',
        encoding="utf-8",
    )
    pool = metric_pool(custom)
    assert list(pool) == ["process.efficiency"]
