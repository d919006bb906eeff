"""Exception hierarchy.

Every error raised on purpose by the library derives from ``HofaError``.
The CLI maps ``ResourceError`` to exit status 3 and every other
``HofaError`` to exit status 2.
"""


class HofaError(Exception):
    """Base class for library errors."""


class InvalidGroupError(HofaError, ValueError):
    pass


class InvalidThresholdError(HofaError, ValueError):
    pass


class InvalidOrderError(HofaError, ValueError):
    pass


class InvalidCoordinateError(HofaError, ValueError):
    pass


class InvalidDimensionError(HofaError, ValueError):
    pass


class IncompleteSystemError(HofaError, ValueError):
    pass


class PreconditionError(HofaError, ValueError):
    pass


class ExactnessError(PreconditionError):
    """An exact verdict was requested on floating-point data."""


class IllDefinedPhaseError(PreconditionError):
    """The requested phase is not a well-defined function on the group."""


class NotASubgroupError(PreconditionError):
    pass


class NotInjectiveError(PreconditionError):
    pass


class NotHomomorphismError(PreconditionError):
    pass


class NotConcentratedError(PreconditionError):
    """Circle samples do not fit in an arc of normalized length 1/3."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class ResourceError(HofaError, MemoryError):
    """A computation would exceed the configured term budget."""

    def __init__(self, msg, required=None, budget=None):
        super().__init__(msg)
        self.required = required
        self.budget = budget


class InternalConsistencyError(HofaError, RuntimeError):
    """An identity that must hold by construction failed."""


class PatternError(HofaError, ValueError):
    """Base for nil-pattern axiom violations."""


class CocycleError(PatternError):
    pass


class ActionError(PatternError):
    pass


class NonCentralError(PatternError):
    pass


class CommutatorError(PatternError):
    pass
