"""Exception hierarchy shared by every module."""


class CattaneoError(Exception):
    """Base class for all package errors."""


class DomainError(CattaneoError, ValueError):
    """A thermodynamic function was evaluated outside its domain."""


class ConfigurationError(CattaneoError, ValueError):
    """Inconsistent parameters, variant, or missing derivative callbacks."""


class ShapeError(CattaneoError, ValueError):
    """Array length does not match the grid."""


class GridTooSmallError(CattaneoError, ValueError):
    """The grid has too few cells for the requested stencil."""


class ParameterError(CattaneoError, ValueError):
    """An operation parameter is out of range."""


class ComparisonError(CattaneoError, ValueError):
    """Two states cannot be compared (different grids or time stamps)."""


class MatrixError(CattaneoError, ArithmeticError):
    """A small dense matrix is singular where it must be invertible."""


class NumericalError(CattaneoError, ArithmeticError):
    """A linear solve failed."""


class StateError(CattaneoError, ValueError):
    """A state lost positivity or finiteness.

    ``nodes`` lists ``(index, field, value)`` triples for the offending nodes.
    """

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = list(nodes)


class SimulationAborted(CattaneoError):
    """A run stopped early; ``report`` holds the partial run report."""

    def __init__(self, message, report=None, cause=None):
        super().__init__(message)
        self.report = report
        self.cause = cause
