"""Exception hierarchy shared by every module."""


class SLError(Exception):
    """Base class for all package errors."""


class InvalidArgument(SLError, ValueError):
    pass


class SingularNodeError(SLError):
    """A coefficient could not be evaluated (non-finite) at a collocation node."""

    def __init__(self, name, x, value):
        self.name = name
        self.x = x
        self.value = value
        super().__init__(f"coefficient {name} is not finite at node x={x!r} (value {value!r})")


class EvaluationAtSingularity(SLError):
    pass


class DegenerateBCError(SLError):
    pass


class NotDegenerateError(SLError):
    pass


class NotApplicableError(SLError):
    pass


class NumericalFailure(SLError):
    def __init__(self, size, reason=""):
        self.size = size
        super().__init__(f"eigensolver failed on a {size}x{size} pencil: {reason}".rstrip(": "))


class NotFound(SLError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "not found"
