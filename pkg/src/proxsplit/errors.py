"""Exception types shared across the package."""


class ProxsplitError(Exception):
    """Base class for all package errors."""


class DimensionError(ProxsplitError):
    """A vector or operator was used with mismatched dimensions."""


class ParameterError(ProxsplitError):
    """A scalar parameter violates its admissible range."""


class DivergenceError(ProxsplitError):
    """An iterate became non-finite during a solve."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
