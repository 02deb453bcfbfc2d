"""Exception hierarchy.

The CLI maps :class:`PrecisionError` to exit code 2 and
:class:`DomainError` to exit code 3.
"""


class StableLatError(Exception):
    pass


class PrecisionError(StableLatError):
    """Requested precision is not reachable from the inputs."""

    def __init__(self, message, needed=None, achieved=None):
        super().__init__(message)
        self.needed = needed
        self.achieved = achieved


class IndeterminateValuationError(PrecisionError):
    """The element is zero to its working precision."""


class UndecidableInvariantsError(PrecisionError):
    pass


class DomainError(StableLatError, ValueError):
    """Argument outside the domain of the operation."""


class NoConvergenceError(DomainError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParityError(DomainError):
    pass


class ReducibleError(DomainError):
    pass


class ResiduallyScalarError(DomainError):
    pass


class SearchFailureError(DomainError):
    pass


class NonOrdinaryError(DomainError):
    pass
