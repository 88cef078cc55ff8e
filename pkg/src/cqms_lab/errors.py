"""Exception hierarchy shared by all modules."""


class LabError(Exception):
    """Base class for every error raised by cqms_lab."""


class GroupMismatchError(LabError, ValueError):
    """Operands belong to different groups, or a normal form has the wrong shape."""


class ParameterError(LabError, ValueError):
    """An argument is outside the documented domain of an operation."""


class HorizonExceededError(LabError):
    """A word length is needed beyond the radius the BFS cache may reach."""

    def __init__(self, message, required_radius):
        super().__init__(message)
        self.required_radius = required_radius


class ResourceLimitError(LabError):
    """A memory or cardinality budget ran out before the computation finished."""

    def __init__(self, message, partial_radius=None):
        super().__init__(message)
        self.partial_radius = partial_radius


class NumericalError(LabError, ArithmeticError):
    """A numerical routine failed its own residual check."""


class ConfigError(LabError, ValueError):
    """An experiment configuration is malformed."""
