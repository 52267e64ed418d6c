"""Exception hierarchy shared by every module of the package."""


class CoherenceError(ValueError):
    """Base class for all validation and computation errors."""


class NonSquare(CoherenceError):
    pass


class NotHermitian(CoherenceError):
    pass


class NotPSD(CoherenceError):
    pass


class NotUnitTrace(CoherenceError):
    pass


class DimensionMismatch(CoherenceError):
    pass


class DimensionTooLarge(CoherenceError):
    pass


class InvalidSpec(CoherenceError):
    """Malformed block specification, channel, or parameter."""


class NotConverged(CoherenceError):
    """Raised when an optimizer exhausts its budget.

    The partial result is kept on ``self.result`` so callers can still
    inspect the best value found.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
