"""Exception hierarchy for the engine.

``ValidationFailure`` subclasses are user/input errors (CLI exit code 1);
everything else signals an internal invariant or runtime failure (exit code 2).
"""
from __future__ import annotations


class ShowrunnerError(Exception):
    """Base class for all engine errors."""


class ValidationFailure(ShowrunnerError):
    """Bad user input: malformed pipelines, traces, parameters."""


# -- pipeline / graph validation ---------------------------------------------

class DuplicateId(ValidationFailure):
    pass


class UnknownDependency(ValidationFailure):
    pass


class CycleError(ValidationFailure):
    def __init__(self, message: str, cycle: tuple[str, ...] = ()):
        super().__init__(message)
        self.cycle = tuple(cycle)


class UnknownId(ValidationFailure):
    pass


class MissingDuration(ValidationFailure):
    pass


class InvalidParams(ValidationFailure):
    pass


# -- scheduling ---------------------------------------------------------------

class InconsistentReport(ShowrunnerError):
    """Progress report references events the graph does not declare."""


class UnknownCompletion(ShowrunnerError):
    """Completion delivered for an event that was not running."""


class DeadlockError(ShowrunnerError):
    """Defensive check: nothing running, nothing ready, events remain."""


class WorkerFailure(ShowrunnerError):
    """A worker exhausted its retry budget; carries the partial result."""

    def __init__(self, message: str, partial_result=None):
        super().__init__(message)
        self.partial_result = partial_result


# -- feedback -----------------------------------------------------------------

class InvalidFeedback(ValidationFailure):
    pass


class UnknownTarget(ValidationFailure):
    pass


class TargetPending(ValidationFailure):
    """Feedback targets an event that never started."""


class TraceTriggerUnknown(ValidationFailure):
    pass


# -- workers ------------------------------------------------------------------

class Cancelled(ShowrunnerError):
    """Execution observed its cancellation signal and stopped."""


class AdapterError(ShowrunnerError):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class MissingInput(ShowrunnerError):
    pass


class UnregisteredRole(ValidationFailure):
    pass


# -- production procedures ----------------------------------------------------

class NonPositiveDuration(ValidationFailure):
    pass


class OverlapTooLarge(ValidationFailure):
    pass


# -- store --------------------------------------------------------------------

class SequenceGap(ShowrunnerError):
    pass


class RunClosed(ShowrunnerError):
    pass


class CorruptLog(ShowrunnerError):
    pass


class UnknownRun(ValidationFailure):
    pass


# -- clock --------------------------------------------------------------------

class PastTime(ShowrunnerError):
    pass


class WorkerError(ShowrunnerError):
    """A single execution attempt failed; the scheduler may retry it."""
