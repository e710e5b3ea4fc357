"""Baselines, change classification, evaluation-strategy selection, and the
confounding-factor ledger.

The engine records which strategy an evaluation uses and classifies observed
changes against expert-defined thresholds; control charts, regression
adjustment, survey instruments, and ROI accounting stay outside it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .core import MeasurementLevel, MetricDirection
from .errors import (
    DegenerateBaselineError,
    InsufficientDataError,
    ThresholdError,
)


class ObservationSource(str, Enum):
    HISTORICAL = "historical"
    ACTIVE_PROJECT = "active-project"
    EVALUATION = "evaluation"


@dataclass(frozen=True)
class Observation:
    """A single measured value for a metric on an entity at a date."""

    metric_id: str
    entity_id: str
    timestamp: date
    value: Fraction
    source: ObservationSource


class ThresholdKind(str, Enum):
    """Relative thresholds compare signed relative change; absolute ones compare
    the direction-adjusted delta in metric units (for zero/near-zero baselines)."""

    RELATIVE = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class Thresholds:
    """Expert-defined bounds demarcating improvement, stagnation, and decline.

    Both bounds are signed changes toward the metric's better direction:
    decline_bound <= 0 <= improve_bound.
    """

    decline_bound: Fraction
    improve_bound: Fraction
    kind: ThresholdKind = ThresholdKind.RELATIVE

    def __post_init__(self) -> None:
        if not (self.decline_bound <= 0 <= self.improve_bound):
            raise ThresholdError(
                f"thresholds must satisfy decline_bound <= 0 <= improve_bound, "
                f"got ({self.decline_bound}, {self.improve_bound})"
            )


class Aggregation(str, Enum):
    MEAN = "mean"
    MEDIAN = "median"


class BaselineRole(str, Enum):
    """Lifecycle of a baseline record.

    ACTIVE is the one current reference per metric; CANDIDATE records hold
    evaluation results that may serve as comparison points without having
    superseded the active baseline; ARCHIVED records were superseded.
    """

    ACTIVE = "active"
    CANDIDATE = "candidate"
    ARCHIVED = "archived"


@dataclass(frozen=True)
class Baseline:
    """Reference value plus thresholds for one metric.

    ``origin`` is "historical" or the id of the evaluation instance whose
    results produced the record.
    """

    id: str
    metric_id: str
    entity_scope: tuple[str, ...]
    value: Fraction
    established_at: date
    thresholds: Thresholds
    evaluator_role: str
    origin: str = "historical"
    aggregation: Aggregation = Aggregation.MEAN
    role: BaselineRole = BaselineRole.ACTIVE
    supersedes: str | None = None
    superseded_by: str | None = None


def aggregate_values(values: Sequence[Fraction], aggregation: Aggregation) -> Fraction:
    """Exact mean or median of observation values."""
    if not values:
        raise InsufficientDataError("cannot aggregate zero observations")
    if aggregation is Aggregation.MEAN:
        return Fraction(sum(values), len(values))
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return ordered[mid]
    return Fraction(ordered[mid - 1] + ordered[mid], 2)


class BaselineLedger:
    """All baseline records of a project, with one active baseline per metric.

    Supersession archives the previous active record and links the chain;
    candidate records join the pool without touching the active pointer.
    """

    def __init__(self, baselines: Iterable[Baseline] = ()):
        self._records: list[Baseline] = list(baselines)

    def __iter__(self):
        return iter(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[Baseline]:
        return list(self._records)

    def for_metric(self, metric_id: str) -> list[Baseline]:
        return [b for b in self._records if b.metric_id == metric_id]

    def active_for(self, metric_id: str) -> Baseline | None:
        for record in self._records:
            if record.metric_id == metric_id and record.role is BaselineRole.ACTIVE:
                return record
        return None

    def get(self, baseline_id: str) -> Baseline | None:
        for record in self._records:
            if record.id == baseline_id:
                return record
        return None

    def _next_id(self) -> str:
        return f"BL{len(self._records) + 1:03d}"

    def add(self, baseline: Baseline, supersede: bool) -> Baseline:
        """Insert a record; when ``supersede`` the current active one is archived."""
        if supersede:
            previous = self.active_for(baseline.metric_id)
            if previous is not None:
                self._records[self._records.index(previous)] = replace(
                    previous, role=BaselineRole.ARCHIVED, superseded_by=baseline.id
                )
                baseline = replace(baseline, supersedes=previous.id)
            if baseline.role is not BaselineRole.ACTIVE:
                baseline = replace(baseline, role=BaselineRole.ACTIVE)
        self._records.append(baseline)
        return baseline

    def establish(
        self,
        metric_id: str,
        *,
        value: Fraction,
        thresholds: Thresholds,
        evaluator_role: str,
        established_at: date,
        entity_scope: Sequence[str] = (),
        origin: str = "historical",
        aggregation: Aggregation = Aggregation.MEAN,
        as_candidate: bool = False,
    ) -> Baseline:
        baseline = Baseline(
            id=self._next_id(),
            metric_id=metric_id,
            entity_scope=tuple(entity_scope),
            value=value,
            established_at=established_at,
            thresholds=thresholds,
            evaluator_role=evaluator_role,
            origin=origin,
            aggregation=aggregation,
            role=BaselineRole.CANDIDATE if as_candidate else BaselineRole.ACTIVE,
        )
        return self.add(baseline, supersede=not as_candidate)


def establish_baseline(
    ledger: BaselineLedger,
    metric_id: str,
    *,
    observations: Sequence[Observation] = (),
    value: Fraction | None = None,
    thresholds: Thresholds,
    evaluator_role: str,
    established_at: date,
    entity_scope: Sequence[str] = (),
    origin: str = "historical",
    aggregation: Aggregation = Aggregation.MEAN,
) -> Baseline:
    """Create a new active baseline from observations or a completed result value.

    The prior active baseline (if any) is archived with a supersession link.
    """
    if value is None:
        relevant = [o.value for o in observations if o.metric_id == metric_id]
        if not relevant:
            raise InsufficientDataError(
                f"no observations for metric {metric_id!r} and no explicit value"
            )
        value = aggregate_values(relevant, aggregation)
        if not entity_scope:
            entity_scope = tuple(
                dict.fromkeys(o.entity_id for o in observations if o.metric_id == metric_id)
            )
    return ledger.establish(
        metric_id,
        value=value,
        thresholds=thresholds,
        evaluator_role=evaluator_role,
        established_at=established_at,
        entity_scope=entity_scope,
        origin=origin,
        aggregation=aggregation,
    )


class ChangeClass(str, Enum):
    IMPROVEMENT = "improvement"
    STAGNATION = "stagnation"
    DECLINE = "decline"


def classify_change(
    baseline: Baseline, observed: Fraction, direction: MetricDirection
) -> ChangeClass:
    """Rate an observed value against a baseline's thresholds.

    The change is signed toward the metric's better direction; values on a
    bound (inclusive middle band) classify as stagnation, so improvement is
    never claimed at the boundary.
    """
    sign = 1 if direction is MetricDirection.HIGHER_IS_BETTER else -1
    if baseline.thresholds.kind is ThresholdKind.RELATIVE:
        if baseline.value == 0:
            raise DegenerateBaselineError(
                f"baseline {baseline.id} is zero; relative thresholds cannot "
                "classify against it (use absolute thresholds)"
            )
        change = sign * (observed - baseline.value) / abs(baseline.value)
    else:
        change = sign * (observed - baseline.value)
    if change > baseline.thresholds.improve_bound:
        return ChangeClass.IMPROVEMENT
    if change < baseline.thresholds.decline_bound:
        return ChangeClass.DECLINE
    return ChangeClass.STAGNATION


class EvaluationStrategy(str, Enum):
    BASIC_COMPARISON = "basic-comparison"
    STATISTICS_BASED = "statistics-based"
    SURVEY = "survey"
    COST_BENEFIT = "cost-benefit"


COMPARISON_STRATEGIES = frozenset(
    {EvaluationStrategy.BASIC_COMPARISON, EvaluationStrategy.STATISTICS_BASED}
)


class CostRank(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


_COST_ORDER = {CostRank.LOW: 0, CostRank.MEDIUM: 1, CostRank.HIGH: 2}


class ConfoundingControl(str, Enum):
    CONTROLLABLE = "controllable"
    CHALLENGING = "challenging"


@dataclass(frozen=True)
class StrategyChoice:
    """One evaluation strategy with its selection criteria and a justification."""

    strategy: EvaluationStrategy
    levels: frozenset[MeasurementLevel]
    cost_rank: CostRank
    confounding: ConfoundingControl
    justification: str = ""


BUILTIN_STRATEGIES: tuple[StrategyChoice, ...] = (
    StrategyChoice(
        strategy=EvaluationStrategy.BASIC_COMPARISON,
        levels=frozenset(
            {MeasurementLevel.PROCESS, MeasurementLevel.PROJECT, MeasurementLevel.PRODUCT}
        ),
        cost_rank=CostRank.MEDIUM,
        confounding=ConfoundingControl.CONTROLLABLE,
    ),
    StrategyChoice(
        strategy=EvaluationStrategy.STATISTICS_BASED,
        levels=frozenset(
            {MeasurementLevel.PROCESS, MeasurementLevel.PROJECT, MeasurementLevel.PRODUCT}
        ),
        cost_rank=CostRank.HIGH,
        confounding=ConfoundingControl.CONTROLLABLE,
    ),
    StrategyChoice(
        strategy=EvaluationStrategy.SURVEY,
        levels=frozenset(
            {MeasurementLevel.PRODUCT, MeasurementLevel.ORGANIZATION, MeasurementLevel.EXTERNAL}
        ),
        cost_rank=CostRank.LOW,
        confounding=ConfoundingControl.CHALLENGING,
    ),
    StrategyChoice(
        strategy=EvaluationStrategy.COST_BENEFIT,
        levels=frozenset(
            {MeasurementLevel.PRODUCT, MeasurementLevel.ORGANIZATION, MeasurementLevel.EXTERNAL}
        ),
        cost_rank=CostRank.MEDIUM,
        confounding=ConfoundingControl.CHALLENGING,
    ),
)

_STRATEGY_ORDER = {choice.strategy: i for i, choice in enumerate(BUILTIN_STRATEGIES)}


def select_strategies(
    levels: Iterable[MeasurementLevel],
    budget: CostRank | None = None,
    require_controllable_confounding: bool = False,
) -> list[StrategyChoice]:
    """Rank eligible strategies for the requested levels.

    Eligible strategies cover at least one requested level (and, when asked,
    have controllable confounding). Ranking: cost ascending, then number of
    covered requested levels descending, then the built-in order. Budget does
    not filter; over-budget strategies are only annotated.
    """
    requested = set(levels)
    if not requested:
        raise ValueError("select_strategies requires at least one measurement level")

    eligible: list[tuple[tuple[int, int, int], StrategyChoice]] = []
    for choice in BUILTIN_STRATEGIES:
        covered = requested & choice.levels
        if not covered:
            continue
        if (
            require_controllable_confounding
            and choice.confounding is not ConfoundingControl.CONTROLLABLE
        ):
            continue
        note = (
            f"covers {', '.join(sorted(l.value for l in covered))}; "
            f"cost {choice.cost_rank.value}; confounding {choice.confounding.value}"
        )
        if budget is not None and _COST_ORDER[choice.cost_rank] > _COST_ORDER[budget]:
            note += f"; exceeds {budget.value} budget"
        ranked = replace(choice, justification=note)
        key = (
            _COST_ORDER[choice.cost_rank],
            -len(covered),
            _STRATEGY_ORDER[choice.strategy],
        )
        eligible.append((key, ranked))
    eligible.sort(key=lambda pair: pair[0])
    return [choice for _key, choice in eligible]


class ConfoundingFactor(str, Enum):
    """The nine recognized confounding-factor categories."""

    PROJECT_TYPE = "project type"
    DEVELOPMENT_MODEL = "development model"
    PRODUCT_SIZE_AND_COMPLEXITY = "product size and complexity"
    PRODUCT_DOMAIN = "product domain"
    TECHNOLOGY_FACTORS = "technology factors"
    PROCESS_COMPLIANCE = "process compliance"
    EMPLOYEE_FACTORS = "employee factors"
    TIME_FACTORS = "time factors"
    MULTIPLE_IMPROVEMENT_INITIATIVES = "multiple improvement initiatives"


class MitigationStatus(str, Enum):
    IDENTIFIED = "identified"
    MITIGATED = "mitigated"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class ConfoundingFactorRecord:
    """An identified confounding factor with its mitigation (e.g. matching,
    expert weighting) and the evaluation instances it applies to."""

    id: str
    factor: ConfoundingFactor
    applies_to: tuple[str, ...]
    mitigation: str
    status: MitigationStatus = MitigationStatus.IDENTIFIED


@dataclass(frozen=True)
class ConfoundingEntry:
    instance_id: str
    strategy: EvaluationStrategy
    records: tuple[ConfoundingFactorRecord, ...]
    flagged: bool
    note: str


@dataclass(frozen=True)
class ConfoundingReport:
    """Per-instance confounding awareness: comparison-based instances without
    any identified factor are flagged; others get an advisory note only."""

    entries: tuple[ConfoundingEntry, ...]

    def flagged_instances(self) -> list[str]:
        return [entry.instance_id for entry in self.entries if entry.flagged]

    def lines(self) -> list[str]:
        out = []
        for entry in self.entries:
            names = ", ".join(r.factor.value for r in entry.records) or "none"
            prefix = "FLAG" if entry.flagged else "ok"
            out.append(
                f"[{prefix}] {entry.instance_id} ({entry.strategy.value}): factors {names}"
                + (f" — {entry.note}" if entry.note else "")
            )
        return out


def confounding_report(
    instances: Sequence,  # Sequence[EvaluationInstance]; untyped to avoid an import cycle
    records: Sequence[ConfoundingFactorRecord],
) -> ConfoundingReport:
    """List each instance's attached factor records and flag unguarded comparisons."""
    entries: list[ConfoundingEntry] = []
    for instance in instances:
        attached = tuple(r for r in records if instance.id in r.applies_to)
        comparison = instance.strategy in COMPARISON_STRATEGIES
        flagged = comparison and not attached
        if flagged:
            note = "comparison-based evaluation with no confounding factors identified"
        elif not attached:
            note = "no confounding factors recorded (advisory)"
        else:
            note = ""
        entries.append(
            ConfoundingEntry(
                instance_id=instance.id,
                strategy=instance.strategy,
                records=attached,
                flagged=flagged,
                note=note,
            )
        )
    return ConfoundingReport(entries=tuple(entries))
