"""Subjective improvement scoring per viewpoint and level, investment-weighted
aggregation across target entities, and radar-chart (kiviat) series.

All arithmetic is exact rational arithmetic; results are reproducible
bit-for-bit. Raw subjective weights are stored as given and normalized at
compute time; after validity exclusions the weights are NOT renormalized —
the remaining coverage is reported instead, so a partially stale score never
masquerades as a fully backed one.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    EvaluationViewpoint,
    MeasurementLevel,
    TargetEntity,
    VIEWPOINTS,
    level_index,
    viewpoint_index,
)
from .errors import (
    DegenerateWeightsError,
    InsufficientViewpointsError,
    LinkageError,
    NoDataError,
    NotExecutedError,
    ZeroInvestmentError,
)
from .scheduling import EvaluationInstance, InstanceStatus, LevelTiming

RATING_MIN = -5
RATING_MAX = 5


@dataclass(frozen=True)
class SubjectiveWeight:
    """A viewpoint's raw importance weight for one metric at one level."""

    viewpoint: EvaluationViewpoint
    level: MeasurementLevel
    metric_id: str
    weight: Fraction

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError(f"subjective weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class ImpactRating:
    """The nominated expert's signed 11-point rating of a metric's change."""

    metric_id: str
    entity_id: str
    rating: int
    rater_role: str
    source_instance: str
    rated_at: date

    def __post_init__(self) -> None:
        if not isinstance(self.rating, int) or isinstance(self.rating, bool):
            raise ValueError("impact rating must be an integer")
        if not (RATING_MIN <= self.rating <= RATING_MAX):
            raise ValueError(
                f"impact rating must lie in [{RATING_MIN}, {RATING_MAX}], got {self.rating}"
            )


@dataclass(frozen=True)
class SviInput:
    """One metric's contribution to a score: normalized weight, rating, validity."""

    metric_id: str
    weight: Fraction
    rating: int | None
    valid: bool
    reason: str = ""


@dataclass(frozen=True)
class SviResult:
    """Subjective value of improvement for one viewpoint, level, and entity.

    ``validity_coverage`` is the sum of normalized weights whose ratings were
    valid at the query date; a coverage below 1 marks a partially stale score.
    ``viewpoint`` is None for the all-viewpoints mean variant.
    """

    viewpoint: EvaluationViewpoint | None
    level: MeasurementLevel
    entity_id: str
    value: Fraction
    validity_coverage: Fraction
    computed_at: date
    inputs: tuple[SviInput, ...]

    @property
    def stale(self) -> bool:
        return self.validity_coverage < 1


def _pick_rating(
    candidates: Sequence[tuple[int, "ImpactRating"]]
) -> "ImpactRating | None":
    """Latest rating by (rated_at, insertion order)."""
    if not candidates:
        return None
    return max(candidates, key=lambda pair: (pair[1].rated_at, pair[0]))[1]


def compute_svi(
    viewpoint: EvaluationViewpoint,
    level: MeasurementLevel,
    entity_id: str,
    as_of: date,
    *,
    weights: Sequence[SubjectiveWeight],
    ratings: Sequence[ImpactRating],
    instances: Mapping[str, EvaluationInstance],
    timings: Mapping[MeasurementLevel, LevelTiming],
) -> SviResult:
    """Weighted sum of valid impact ratings for one viewpoint/level/entity.

    Weights are normalized over all scoped metrics; ratings whose source
    evaluation has outlived its degradation factor at ``as_of`` (exclusive —
    age equal to the factor still counts) are excluded and reported invalid.
    """
    scoped = [w for w in weights if w.viewpoint is viewpoint and w.level is level]
    if not scoped:
        raise DegenerateWeightsError(
            f"no subjective weights defined for ({viewpoint.value}, {level.value})"
        )
    raw_total = sum((w.weight for w in scoped), Fraction(0))
    if raw_total == 0:
        raise DegenerateWeightsError(
            f"all subjective weights for ({viewpoint.value}, {level.value}) are zero"
        )

    inputs: list[SviInput] = []
    value = Fraction(0)
    coverage = Fraction(0)
    any_rating = False
    for weight in scoped:
        normalized = weight.weight / raw_total
        candidates = [
            (index, r)
            for index, r in enumerate(ratings)
            if r.metric_id == weight.metric_id
            and r.entity_id == entity_id
            and r.rated_at <= as_of
        ]
        rating = _pick_rating(candidates)
        if rating is None:
            inputs.append(
                SviInput(
                    metric_id=weight.metric_id,
                    weight=normalized,
                    rating=None,
                    valid=False,
                    reason="no rating",
                )
            )
            continue
        any_rating = True
        instance = instances.get(rating.source_instance)
        if instance is None:
            raise LinkageError(
                f"rating for {rating.metric_id!r} references unknown instance "
                f"{rating.source_instance!r}"
            )
        if instance.status is not InstanceStatus.DONE or instance.executed_at is None:
            raise NotExecutedError(
                f"rating for {rating.metric_id!r} references instance "
                f"{instance.id}, which has not been executed"
            )
        timing = timings.get(instance.level)
        if timing is None:
            raise LinkageError(f"no timing defined for level {instance.level.value}")
        age = (as_of - instance.executed_at).days
        if age > timing.degradation_factor:
            inputs.append(
                SviInput(
                    metric_id=weight.metric_id,
                    weight=normalized,
                    rating=rating.rating,
                    valid=False,
                    reason="expired",
                )
            )
            continue
        inputs.append(
            SviInput(
                metric_id=weight.metric_id,
                weight=normalized,
                rating=rating.rating,
                valid=True,
            )
        )
        value += normalized * rating.rating
        coverage += normalized

    if not any_rating:
        raise NoDataError(
            f"no impact ratings for ({viewpoint.value}, {level.value}, {entity_id})"
        )
    return SviResult(
        viewpoint=viewpoint,
        level=level,
        entity_id=entity_id,
        value=value,
        validity_coverage=coverage,
        computed_at=as_of,
        inputs=tuple(inputs),
    )


def mean_svi(svis: Sequence[SviResult]) -> SviResult:
    """All-viewpoints mean of one entity's SVIs at one level."""
    if not svis:
        raise NoDataError("cannot average zero scores")
    level = svis[0].level
    entity_id = svis[0].entity_id
    if any(s.level is not level or s.entity_id != entity_id for s in svis):
        raise ValueError("mean_svi expects scores for a single (level, entity)")
    n = len(svis)
    return SviResult(
        viewpoint=None,
        level=level,
        entity_id=entity_id,
        value=Fraction(sum(s.value for s in svis), n),
        validity_coverage=Fraction(sum(s.validity_coverage for s in svis), n),
        computed_at=svis[0].computed_at,
        inputs=tuple(i for s in svis for i in s.inputs),
    )


@dataclass(frozen=True)
class AsviEntityTerm:
    entity_id: str
    svi: Fraction
    investment_unit: Fraction


@dataclass(frozen=True)
class AsviResult:
    """Investment-weighted mean of entity scores at one level.

    ``viewpoint`` is the shared viewpoint of the inputs, or None for the
    all-viewpoints-mean variant.
    """

    level: MeasurementLevel
    value: Fraction
    per_entity: tuple[AsviEntityTerm, ...]
    computed_at: date
    viewpoint: EvaluationViewpoint | None = None
    stale: bool = False


def compute_asvi(
    level: MeasurementLevel,
    as_of: date,
    svi_results: Sequence[SviResult],
    entities: Mapping[str, TargetEntity],
) -> AsviResult:
    """Aggregate entity SVIs at a level, weighted by investment units.

    Uniformly scaling every investment unit leaves the result unchanged, and
    equal units reduce it to the plain mean.
    """
    at_level = [s for s in svi_results if s.level is level]
    if not at_level:
        raise NoDataError(f"no scores at level {level.value} to aggregate")
    by_entity: dict[str, SviResult] = {}
    for svi in at_level:
        if svi.entity_id in by_entity:
            raise ValueError(
                f"aggregation needs exactly one score per entity; duplicate for "
                f"{svi.entity_id!r}"
            )
        by_entity[svi.entity_id] = svi

    terms: list[AsviEntityTerm] = []
    total = Fraction(0)
    for entity_id in sorted(by_entity):
        entity = entities.get(entity_id)
        if entity is None:
            raise LinkageError(f"score references unknown entity {entity_id!r}")
        terms.append(
            AsviEntityTerm(
                entity_id=entity_id,
                svi=by_entity[entity_id].value,
                investment_unit=entity.investment_unit,
            )
        )
        total += entity.investment_unit
    if total == 0:
        raise ZeroInvestmentError(
            f"investment units at {level.value} sum to zero; aggregation undefined"
        )
    value = sum((t.svi * t.investment_unit for t in terms), Fraction(0)) / total

    viewpoints = {s.viewpoint for s in at_level}
    shared = viewpoints.pop() if len(viewpoints) == 1 else None
    return AsviResult(
        level=level,
        value=value,
        per_entity=tuple(terms),
        computed_at=as_of,
        viewpoint=shared,
        stale=any(s.stale for s in at_level),
    )


KIVIAT_EXPORT_HEADER = "axis,value,staleness"

STALENESS_FRESH = "fresh"
STALENESS_STALE = "stale"
STALENESS_ABSENT = "absent"


@dataclass(frozen=True)
class KiviatAxis:
    """One radar axis: value in [-5, +5] or absent, with a staleness marker."""

    axis: str
    value: Fraction | None
    staleness: str
    coverage: Fraction | None = None
    note: str = ""


@dataclass(frozen=True)
class KiviatSeries:
    """Radar-chart data with a deterministic axis order (enumeration order)."""

    kind: str
    context: str
    as_of: date
    axes: tuple[KiviatAxis, ...]


def kiviat_viewpoint_series(
    level: MeasurementLevel,
    entity_id: str,
    as_of: date,
    *,
    weights: Sequence[SubjectiveWeight],
    ratings: Sequence[ImpactRating],
    instances: Mapping[str, EvaluationInstance],
    timings: Mapping[MeasurementLevel, LevelTiming],
) -> KiviatSeries:
    """Per-level radar: one axis per evaluation viewpoint."""
    axes: list[KiviatAxis] = []
    for viewpoint in VIEWPOINTS:
        try:
            svi = compute_svi(
                viewpoint,
                level,
                entity_id,
                as_of,
                weights=weights,
                ratings=ratings,
                instances=instances,
                timings=timings,
            )
        except (DegenerateWeightsError, NoDataError) as exc:
            axes.append(
                KiviatAxis(
                    axis=viewpoint.value,
                    value=None,
                    staleness=STALENESS_ABSENT,
                    note=str(exc),
                )
            )
            continue
        axes.append(
            KiviatAxis(
                axis=viewpoint.value,
                value=svi.value,
                staleness=STALENESS_STALE if svi.stale else STALENESS_FRESH,
                coverage=svi.validity_coverage,
            )
        )
    return KiviatSeries(
        kind="viewpoints",
        context=f"{level.value}/{entity_id}",
        as_of=as_of,
        axes=tuple(axes),
    )


def kiviat_level_series(
    levels: Iterable[MeasurementLevel],
    as_of: date,
    *,
    weights: Sequence[SubjectiveWeight],
    ratings: Sequence[ImpactRating],
    instances: Mapping[str, EvaluationInstance],
    timings: Mapping[MeasurementLevel, LevelTiming],
    entities: Mapping[str, TargetEntity],
    viewpoint: EvaluationViewpoint | None = None,
) -> KiviatSeries:
    """Cross-level radar of aggregated scores (one axis per scoped level).

    With ``viewpoint`` None, each entity's viewpoints are averaged before the
    investment-weighted aggregation (the aggregated-chart default).
    """
    axes: list[KiviatAxis] = []
    for level in sorted(set(levels), key=level_index):
        entity_svis: list[SviResult] = []
        for entity_id in sorted(entities):
            if viewpoint is not None:
                try:
                    entity_svis.append(
                        compute_svi(
                            viewpoint,
                            level,
                            entity_id,
                            as_of,
                            weights=weights,
                            ratings=ratings,
                            instances=instances,
                            timings=timings,
                        )
                    )
                except (DegenerateWeightsError, NoDataError):
                    continue
            else:
                singles: list[SviResult] = []
                for vp in VIEWPOINTS:
                    try:
                        singles.append(
                            compute_svi(
                                vp,
                                level,
                                entity_id,
                                as_of,
                                weights=weights,
                                ratings=ratings,
                                instances=instances,
                                timings=timings,
                            )
                        )
                    except (DegenerateWeightsError, NoDataError):
                        continue
                if singles:
                    entity_svis.append(mean_svi(singles))
        if not entity_svis:
            axes.append(
                KiviatAxis(
                    axis=level.value,
                    value=None,
                    staleness=STALENESS_ABSENT,
                    note="no computable scores at this level",
                )
            )
            continue
        try:
            asvi = compute_asvi(level, as_of, entity_svis, entities)
        except ZeroInvestmentError as exc:
            axes.append(
                KiviatAxis(
                    axis=level.value, value=None, staleness=STALENESS_ABSENT, note=str(exc)
                )
            )
            continue
        axes.append(
            KiviatAxis(
                axis=level.value,
                value=asvi.value,
                staleness=STALENESS_STALE if asvi.stale else STALENESS_FRESH,
            )
        )
    return KiviatSeries(kind="levels", context="aggregated", as_of=as_of, axes=tuple(axes))


def kiviat_delimited(series: KiviatSeries) -> str:
    """Render a series as delimited text: header ``axis,value,staleness``.

    Values are decimal approximations for external plotting tools; absent
    axes keep an empty value field.
    """
    lines = [KIVIAT_EXPORT_HEADER]
    for axis in series.axes:
        value = "" if axis.value is None else repr(float(axis.value))
        lines.append(f"{axis.axis},{value},{axis.staleness}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DivergencePair:
    viewpoint_a: EvaluationViewpoint
    viewpoint_b: EvaluationViewpoint
    delta: Fraction
    sign_divergence: bool
    delta_flag: bool

    @property
    def flagged(self) -> bool:
        return self.sign_divergence or self.delta_flag


@dataclass(frozen=True)
class DivergenceReport:
    """Pairwise viewpoint disagreement at one level; flagged pairs warrant a
    closer look at the underlying evaluations."""

    level: MeasurementLevel
    threshold: Fraction
    pairs: tuple[DivergencePair, ...]

    def flags(self) -> list[DivergencePair]:
        return [p for p in self.pairs if p.flagged]

    @property
    def is_clean(self) -> bool:
        return not self.flags()


def divergence_report(
    level: MeasurementLevel,
    svis: Sequence[SviResult],
    threshold: Fraction = Fraction(2),
) -> DivergenceReport:
    """Compare viewpoint scores pairwise; flag opposite signs or wide gaps."""
    by_viewpoint: dict[EvaluationViewpoint, SviResult] = {}
    for svi in svis:
        if svi.level is not level or svi.viewpoint is None:
            continue
        by_viewpoint[svi.viewpoint] = svi
    if len(by_viewpoint) < 2:
        raise InsufficientViewpointsError(
            f"divergence analysis at {level.value} needs at least two viewpoint "
            f"scores, got {len(by_viewpoint)}"
        )
    ordered = sorted(by_viewpoint, key=viewpoint_index)
    pairs: list[DivergencePair] = []
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            va, vb = by_viewpoint[a].value, by_viewpoint[b].value
            delta = va - vb
            pairs.append(
                DivergencePair(
                    viewpoint_a=a,
                    viewpoint_b=b,
                    delta=delta,
                    sign_divergence=(va > 0 > vb) or (vb > 0 > va),
                    delta_flag=abs(delta) > threshold,
                )
            )
    return DivergenceReport(level=level, threshold=threshold, pairs=tuple(pairs))
