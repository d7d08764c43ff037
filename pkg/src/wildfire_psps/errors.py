"""Exception hierarchy shared by every module of the package."""


class PspsError(Exception):
    """Base class for all package errors."""


class ParseError(PspsError):
    """A file could not be parsed into the documented schema."""


class ValidationError(PspsError):
    """Data parsed but violates an invariant. ``field`` names the offender."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class OutOfRange(PspsError, IndexError):
    pass


class OutOfDomain(PspsError, ValueError):
    pass


class ModelBuildError(PspsError):
    pass


class SolverError(PspsError):
    pass


class LimitReached(PspsError):
    """A time/iteration limit stopped a solve; ``incumbent`` holds the best point found."""

    def __init__(self, message, incumbent=None, gap=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.gap = gap


class IterationLimit(LimitReached):
    pass
