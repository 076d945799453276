"""Exception hierarchy shared by every module of the package."""


class MdpError(Exception):
    """Base class for all errors raised by matmdp."""


class ValidationError(MdpError, ValueError):
    """Input arrays violate a structural invariant (shape, simplex, range)."""


class SimplexViolation(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonFiniteInput(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class ParseError(MdpError, ValueError):
    """A serialized document is malformed. Carries the offending field or line."""

    def __init__(self, message, *, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line


class SingularSystem(MdpError, ArithmeticError):
    """A Bellman-type linear system could not be solved to tolerance."""


class ConsistencyError(MdpError, RuntimeError):
    """A solver produced output that breaks a mathematical guarantee."""


class NotUniqueError(MdpError):
    """The stationary distribution of the induced chain is not unique."""
