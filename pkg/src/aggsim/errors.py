"""Exception types raised by the solver and the harness."""


class ConfigurationError(ValueError):
    """Invalid grid, parameter or configuration input."""


class PhaseBoundError(ValueError):
    """A sample of the order parameter reached or crossed the barrier |phi| = 1."""


class StepFailure(RuntimeError):
    """A time step could not be completed; the caller may retry with a smaller dt."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CFLViolation(StepFailure):
    """The requested time step violates the advective or viscous stability guard."""


class PressureSolveError(StepFailure):
    """The variable-density pressure iteration did not converge."""
