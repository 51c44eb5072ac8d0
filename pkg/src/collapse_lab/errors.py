"""Exception hierarchy shared by all collapse_lab modules."""


class CollapseLabError(Exception):
    """Base class for every error raised by the library."""


class NotHermitian(CollapseLabError, ValueError):
    pass


class NoConvergence(CollapseLabError, RuntimeError):
    pass


class DimMismatch(CollapseLabError, ValueError):
    pass


class IndexOutOfRange(CollapseLabError, IndexError):
    pass


class InvalidState(CollapseLabError, ValueError):
    """Matrix is not a valid density matrix (trace, Hermiticity or positivity)."""


class DegenerateObservable(CollapseLabError, ValueError):
    pass


class InvalidDistribution(CollapseLabError, ValueError):
    pass


class EmptyGrid(CollapseLabError, ValueError):
    pass


class ZeroConditioningEvent(CollapseLabError, ZeroDivisionError):
    """Conditioning on an event of (numerically) zero probability."""


class UnsupportedDimension(CollapseLabError, ValueError):
    pass


class InvalidParams(CollapseLabError, ValueError):
    pass


class ParseError(CollapseLabError, ValueError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(CollapseLabError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
