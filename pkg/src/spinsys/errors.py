class SpinSysError(Exception):
    """Base class for errors raised by spinsys."""


class HypothesisViolation(SpinSysError):
    """Bounded rates or weighted summable influence fails for a model."""


class InvariantViolation(SpinSysError):
    """A pathwise invariant was broken. ``witness`` carries the counterexample."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(SpinSysError):
    """Malformed experiment configuration."""

    def __init__(self, message, location=None):
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location


class BoundaryTouchWarning(UserWarning):
    """A simulated region reached the edge of its window."""


class StabilizationWarning(UserWarning):
    """Values only agreed at the largest box of a schedule."""
