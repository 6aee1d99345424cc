"""Exception hierarchy shared by every module."""


class CoarseEndsError(Exception):
    """Base class for all errors raised by the package."""


class ConfigError(CoarseEndsError):
    """A descriptor, config file or argument is malformed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(CoarseEndsError):
    """A point lies outside the declared domain of a map or endpoint."""


class PreconditionError(CoarseEndsError):
    """An operation was called on inputs that fail its stated precondition.

    ``verdict`` carries the offending verdict when one was computed.
    """

    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)


class InternalError(CoarseEndsError):
    """An invariant of the construction itself was violated."""
