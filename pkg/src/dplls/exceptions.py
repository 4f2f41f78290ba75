"""Exception types shared across the package."""


class DPLLSError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DPLLSError, ValueError):
    """Invalid input data, shapes, or configuration."""


class ConvergenceError(DPLLSError, RuntimeError):
    """An iterative solver exhausted its budget before meeting tolerance.

    Carries the last iterate and gradient norm so callers can inspect how
    far the solver got.
    """

    def __init__(self, message, *, params=None, grad_norm=None):
        super().__init__(message)
        self.params = params
        self.grad_norm = grad_norm


class DegenerateFitError(DPLLSError, RuntimeError):
    """The scale parameter was driven to a boundary (sigma -> 0 or inf)."""


class SolverError(DPLLSError, RuntimeError):
    """A linear solve failed where the repair step should have prevented it."""
