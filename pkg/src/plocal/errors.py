"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PLocalError(Exception):
    exit_code = 1


class PreconditionError(PLocalError):
    """Input violates an operation's precondition."""

    exit_code = 2


class OutOfRangeError(PreconditionError):
    """Requested degree lies outside the range the engine can certify.

    ``max_admissible`` carries the largest degree that would have been accepted,
    when known.
    """

    def __init__(self, message, max_admissible=None):
        super().__init__(message)
        self.max_admissible = max_admissible


class MalformedMapError(PreconditionError):
    pass


class UnderdeterminedError(PLocalError):
    """A differential (or an extension) is not forced by the available data."""

    exit_code = 3


class InconsistencyError(PLocalError):
    """A computed comparison contradicts an invariant that must hold."""

    exit_code = 4
