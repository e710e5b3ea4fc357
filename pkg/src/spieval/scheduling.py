"""Evaluation scheduling under effect latency (lag) and result-validity decay
(degradation), and effective-baseline resolution.

Durations are whole days. A result whose age equals the degradation factor is
still valid (inclusive bound), and a comparison made against a baseline that
old promotes its results to the new baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date, timedelta
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Initiative, MeasurementLevel, Metric, SuccessIndicator, level_index
from .errors import (
    IncompleteDataError,
    InstanceStateError,
    NotExecutedError,
    StaleBaselineError,
    ThresholdError,
)
from .evaluation import (
    Aggregation,
    Baseline,
    BaselineLedger,
    ChangeClass,
    EvaluationStrategy,
    Observation,
    Thresholds,
    aggregate_values,
    classify_change,
    select_strategies,
)


class TimingProvenance(str, Enum):
    EXPERT_ESTIMATE = "expert-estimate"
    HISTORICAL_HEURISTIC = "historical-heuristic"


@dataclass(frozen=True)
class LevelTiming:
    """Per-level lag factor (effect latency) and degradation factor (validity
    decay), both in days, with the provenance of the estimates."""

    level: MeasurementLevel
    lag_factor: int
    degradation_factor: int
    provenance: TimingProvenance = TimingProvenance.EXPERT_ESTIMATE

    def __post_init__(self) -> None:
        if self.lag_factor < 0:
            raise ValueError(f"lag factor must be >= 0, got {self.lag_factor}")
        if self.degradation_factor <= 0:
            raise ValueError(
                f"degradation factor must be > 0, got {self.degradation_factor}"
            )


class EvaluationPurpose(str, Enum):
    ESTABLISH_BASELINE = "establish-baseline"
    COMPARE = "compare"


class InstanceStatus(str, Enum):
    PLANNED = "planned"
    DONE = "done"


@dataclass(frozen=True)
class MetricOutcome:
    """Result row of an executed evaluation for one metric."""

    metric_id: str
    observed: Fraction
    classification: ChangeClass | None = None
    baseline_id: str | None = None


@dataclass(frozen=True)
class EvaluationInstance:
    """A scheduled assessment at one time point on one measurement level."""

    id: str
    scheduled_date: date
    level: MeasurementLevel
    entity_ids: tuple[str, ...]
    strategy: EvaluationStrategy
    experts: tuple[str, ...]
    purpose: EvaluationPurpose
    status: InstanceStatus = InstanceStatus.PLANNED
    executed_at: date | None = None
    results: tuple[MetricOutcome, ...] = ()

    def __post_init__(self) -> None:
        if not self.experts:
            raise ValueError(f"instance {self.id} must be assigned at least one expert")
        if not self.entity_ids:
            raise ValueError(f"instance {self.id} must cover at least one entity")

    @property
    def baseline_refs(self) -> dict[str, str]:
        """Baselines used per metric (compare instances only)."""
        return {
            r.metric_id: r.baseline_id for r in self.results if r.baseline_id is not None
        }


@dataclass(frozen=True)
class SchedulePlan:
    """Planned instances plus any planning warnings (e.g. empty schedule)."""

    instances: tuple[EvaluationInstance, ...]
    warnings: tuple[str, ...] = ()


def _metrics_at_level(
    level: MeasurementLevel,
    metrics: Mapping[str, Metric],
    indicators: Mapping[str, SuccessIndicator],
) -> list[Metric]:
    out = []
    for metric in metrics.values():
        indicator = indicators.get(metric.indicator_id)
        if indicator is not None and indicator.level is level:
            out.append(metric)
    return sorted(out, key=lambda m: m.id)


def default_strategy_for(level: MeasurementLevel) -> EvaluationStrategy:
    """Lowest-cost built-in strategy covering the level."""
    return select_strategies({level})[0].strategy


def plan_schedule(
    initiative: Initiative,
    timings: Mapping[MeasurementLevel, LevelTiming],
    horizon: tuple[date, date],
    *,
    metrics: Mapping[str, Metric],
    indicators: Mapping[str, SuccessIndicator],
    ledger: BaselineLedger | None = None,
    entity_starts: Mapping[str, date] | None = None,
    strategy_by_level: Mapping[MeasurementLevel, EvaluationStrategy] | None = None,
    id_start: int = 1,
) -> SchedulePlan:
    """Plan periodic evaluations per level and entity group.

    For each timed level, entities sharing an introduction date share one
    chain: the first instance falls at introduction + lag (purpose
    establish-baseline unless every level metric already has a valid
    baseline there), and follow-ups repeat every degradation factor so no
    gap exceeds the validity window. Extending the horizon only appends.
    """
    start, end = horizon
    if end < start:
        raise ValueError("horizon end precedes horizon start")
    ledger = ledger if ledger is not None else BaselineLedger()
    entity_starts = dict(entity_starts or {})
    default_intro = initiative.phases[0].start if initiative.phases else start

    warnings: list[str] = []
    instances: list[EvaluationInstance] = []
    counter = id_start

    levels = sorted(timings, key=level_index)
    for level in levels:
        timing = timings[level]
        level_metrics = _metrics_at_level(level, metrics, indicators)
        if not level_metrics:
            warnings.append(
                f"level {level.value} has a timing but no metrics; nothing scheduled"
            )
            continue
        experts = tuple(sorted({m.evaluator_role for m in level_metrics}))
        strategy = (
            strategy_by_level[level]
            if strategy_by_level and level in strategy_by_level
            else default_strategy_for(level)
        )

        groups: dict[date, list[str]] = {}
        for entity_id in initiative.target_entities:
            intro = entity_starts.get(entity_id, default_intro)
            groups.setdefault(intro, []).append(entity_id)

        for intro in sorted(groups):
            entity_ids = tuple(groups[intro])
            first = intro + timedelta(days=timing.lag_factor)
            if first > end:
                warnings.append(
                    f"lag factor pushes the first {level.value} evaluation for "
                    f"{', '.join(entity_ids)} past the horizon end"
                )
                continue
            current = max(first, start)
            baselined = all(
                effective_baseline(ledger.for_metric(m.id), m.id, current, timing)
                is not None
                for m in level_metrics
            )
            purpose = (
                EvaluationPurpose.COMPARE
                if baselined
                else EvaluationPurpose.ESTABLISH_BASELINE
            )
            while current <= end:
                instances.append(
                    EvaluationInstance(
                        id=f"EI{counter:02d}",
                        scheduled_date=current,
                        level=level,
                        entity_ids=entity_ids,
                        strategy=strategy,
                        experts=experts,
                        purpose=purpose,
                        status=InstanceStatus.PLANNED,
                    )
                )
                counter += 1
                purpose = EvaluationPurpose.COMPARE
                current = current + timedelta(days=timing.degradation_factor)

    if not instances:
        warnings.append("empty schedule: no evaluation fits inside the horizon")
    return SchedulePlan(instances=tuple(instances), warnings=tuple(warnings))


def effective_baseline(
    baselines: Iterable[Baseline],
    metric_id: str,
    query_date: date,
    timing: LevelTiming,
) -> Baseline | None:
    """Most recent baseline valid at the query date, or None.

    A record is valid when established on or before the query date and no
    older than the degradation factor (inclusive). Active, candidate, and
    archived records all count.
    """
    best: Baseline | None = None
    best_key: tuple[date, int] | None = None
    for index, record in enumerate(baselines):
        if record.metric_id != metric_id:
            continue
        if record.established_at > query_date:
            continue
        age = (query_date - record.established_at).days
        if age > timing.degradation_factor:
            continue
        key = (record.established_at, index)
        if best_key is None or key > best_key:
            best, best_key = record, key
    return best


def execute_evaluation(
    instance: EvaluationInstance,
    observations: Sequence[Observation],
    *,
    metrics: Mapping[str, Metric],
    indicators: Mapping[str, SuccessIndicator],
    ledger: BaselineLedger,
    timing: LevelTiming,
    executed_on: date | None = None,
    thresholds: Mapping[str, Thresholds] | None = None,
    aggregation: Aggregation = Aggregation.MEAN,
) -> EvaluationInstance:
    """Execute a planned instance against observed values and return it done.

    Establish-baseline instances turn their per-metric values into new active
    baselines (expert thresholds required). Compare instances classify each
    metric against its effective baseline; results always join the baseline
    pool as candidates, and when the used baseline's age has reached the
    degradation factor they are promoted to the new active baseline.
    """
    if instance.status is not InstanceStatus.PLANNED:
        raise InstanceStateError(f"instance {instance.id} is not planned (already executed?)")
    executed_on = executed_on if executed_on is not None else instance.scheduled_date

    level_metrics = _metrics_at_level(instance.level, metrics, indicators)
    if not level_metrics:
        raise IncompleteDataError(
            f"no metrics exist at level {instance.level.value}", missing=()
        )

    values: dict[str, Fraction] = {}
    for metric in level_metrics:
        relevant = [
            o.value
            for o in observations
            if o.metric_id == metric.id and o.entity_id in instance.entity_ids
        ]
        if relevant:
            values[metric.id] = aggregate_values(relevant, aggregation)
    missing = tuple(m.id for m in level_metrics if m.id not in values)
    if missing:
        raise IncompleteDataError(
            f"observations missing for metrics: {', '.join(missing)}", missing=missing
        )

    results: list[MetricOutcome] = []
    if instance.purpose is EvaluationPurpose.ESTABLISH_BASELINE:
        thresholds = thresholds or {}
        unthresholded = tuple(m.id for m in level_metrics if m.id not in thresholds)
        if unthresholded:
            raise ThresholdError(
                "establish-baseline execution needs thresholds for: "
                + ", ".join(unthresholded)
            )
        for metric in level_metrics:
            created = ledger.establish(
                metric.id,
                value=values[metric.id],
                thresholds=thresholds[metric.id],
                evaluator_role=metric.evaluator_role,
                established_at=executed_on,
                entity_scope=instance.entity_ids,
                origin=instance.id,
                aggregation=aggregation,
            )
            results.append(
                MetricOutcome(metric_id=metric.id, observed=values[metric.id],
                              classification=None, baseline_id=created.id)
            )
    else:
        for metric in level_metrics:
            used = effective_baseline(
                ledger.for_metric(metric.id), metric.id, executed_on, timing
            )
            if used is None:
                raise StaleBaselineError(
                    f"no baseline for metric {metric.id!r} is valid at "
                    f"{executed_on.isoformat()} (degradation factor "
                    f"{timing.degradation_factor} days); re-baseline before comparing"
                )
            classification = classify_change(used, values[metric.id], metric.direction)
            age = (executed_on - used.established_at).days
            promote = age >= timing.degradation_factor
            ledger.establish(
                metric.id,
                value=values[metric.id],
                thresholds=used.thresholds,
                evaluator_role=used.evaluator_role,
                established_at=executed_on,
                entity_scope=instance.entity_ids,
                origin=instance.id,
                aggregation=aggregation,
                as_candidate=not promote,
            )
            results.append(
                MetricOutcome(
                    metric_id=metric.id,
                    observed=values[metric.id],
                    classification=classification,
                    baseline_id=used.id,
                )
            )

    return replace(
        instance,
        status=InstanceStatus.DONE,
        executed_at=executed_on,
        results=tuple(results),
    )


class ValidityStatus(str, Enum):
    VALID = "valid"
    EXPIRED = "expired"


def validity_status(
    instance: EvaluationInstance, as_of: date, timing: LevelTiming
) -> ValidityStatus:
    """Whether a done instance's results still support decisions at ``as_of``."""
    if instance.status is not InstanceStatus.DONE or instance.executed_at is None:
        raise NotExecutedError(f"instance {instance.id} has not been executed")
    age = (as_of - instance.executed_at).days
    return ValidityStatus.VALID if age <= timing.degradation_factor else ValidityStatus.EXPIRED
