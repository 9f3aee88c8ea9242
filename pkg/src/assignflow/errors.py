"""Exception hierarchy shared by all modules."""


class AssignFlowError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(AssignFlowError, ValueError):
    pass


class DomainError(AssignFlowError, ValueError):
    """A point lies outside the open manifold where the map is defined."""


class PreconditionError(AssignFlowError):
    """A hypothesis of an analysis result (e.g. positive diagonal) is violated."""


class ResourceLimitError(AssignFlowError):
    pass


class RangeError(AssignFlowError):
    """A vector that must lie in the range of an operator does not."""


class DataError(AssignFlowError, ValueError):
    pass


class UnsupportedError(AssignFlowError):
    pass
