"""Exception types raised across the package."""


class CSynthError(Exception):
    """Base class for all package errors."""


class DimensionError(CSynthError, ValueError):
    pass


class ParseError(CSynthError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IterationLimitError(CSynthError, RuntimeError):
    """An iterative method hit its iteration cap.

    ``estimate`` carries the best value reached before giving up.
    """

    def __init__(self, message, estimate=None):
        self.estimate = estimate
        super().__init__(message)


class CapacityError(CSynthError, ValueError):
    pass


class DegenerateInputError(CSynthError, ValueError):
    pass


class ValidationError(CSynthError, ValueError):
    pass


class PreconditionError(CSynthError, ValueError):
    pass
