"""Exception hierarchy shared across the package."""


class MatchsimError(Exception):
    """Base class for all package-specific errors."""


class InvalidConfigError(MatchsimError):
    """A generation or scenario configuration is internally inconsistent."""


class AssumptionViolatedError(MatchsimError):
    """An operation requires a structural assumption the instance fails."""


class MalformedPreferencesError(MatchsimError):
    """A submitted preference list is not a permutation of the opposite side."""


class OffGridEffortError(MatchsimError):
    """An effort level is not on the worker-task effort grid."""


class OutOfPhaseError(MatchsimError):
    """A phase-specific operation was invoked in the wrong phase."""


class LedgerIncompleteError(MatchsimError):
    """A worker was asked to report before observing every task."""


class NonConstantTailError(MatchsimError):
    """Limit-mode accounting requires an eventually-constant matching."""


class EnumerationCapError(MatchsimError):
    """A strategy enumeration would exceed the configured cap."""
