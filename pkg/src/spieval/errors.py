"""Exception hierarchy for the evaluation engine.

Every domain operation raises a subclass of :class:`SpiEvalError`; callers
(CLI, HTTP service) map them onto exit codes / status codes in one place.
"""

from __future__ import annotations


class SpiEvalError(Exception):
    """Base class for all engine errors."""


class ScopeViolationError(SpiEvalError):
    """A scope-matrix assignment targets a level outside the coverage plan."""


class DuplicateCellError(SpiEvalError):
    """Two assignments target the same (level, viewpoint) cell."""


class NothingToDeriveError(SpiEvalError):
    """Goal derivation was requested on an empty scope matrix."""


class LinkageError(SpiEvalError):
    """A reference points at a missing object or one of the wrong kind."""


class InsufficientDataError(SpiEvalError):
    """A baseline was requested without any observations or value."""


class ThresholdError(SpiEvalError):
    """Baseline thresholds are malformed (decline bound must be <= 0 <= improve bound)."""


class DegenerateBaselineError(SpiEvalError):
    """Relative thresholds cannot classify against a zero-valued baseline."""


class IncompleteDataError(SpiEvalError):
    """An evaluation execution is missing observations for scoped metrics."""

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


class StaleBaselineError(SpiEvalError):
    """No baseline is valid at the evaluation date; re-baselining is needed."""


class NotExecutedError(SpiEvalError):
    """The operation requires an executed (done) evaluation instance."""


class InstanceStateError(SpiEvalError):
    """The evaluation instance is not in the state the operation requires."""


class DegenerateWeightsError(SpiEvalError):
    """All subjective weights for the scope are zero (or none were defined)."""


class NoDataError(SpiEvalError):
    """No impact ratings exist for the requested scope."""


class ZeroInvestmentError(SpiEvalError):
    """Investment units sum to zero; the aggregated score is undefined."""


class InsufficientViewpointsError(SpiEvalError):
    """Divergence analysis needs at least two viewpoint scores."""


class IntegrityError(SpiEvalError):
    """A stored document violates referential integrity."""


class SchemaError(SpiEvalError):
    """A project file failed to parse or carries an unsupported schema version."""


class RevisionConflictError(SpiEvalError):
    """An optimistic-concurrency write carried a stale revision."""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"revision conflict: write expected revision {expected}, store is at {actual}"
        )
        self.expected = expected
        self.actual = actual


class UnknownOperationError(SpiEvalError):
    """The store was asked to apply an operation it does not know."""
