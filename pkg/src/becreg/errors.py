"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems -> 2,
numerical problems -> 3.
"""


class BecregError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BecregError):
    """Invalid or inconsistent input parameters."""


class CapabilityError(BecregError):
    """Request exceeds a documented capability limit (basis size, quanta range)."""


class NumericalError(BecregError):
    """A numerical procedure failed to converge or lost accuracy."""


class SingularityError(NumericalError):
    """An energy denominator (near-)vanished; carries the offending state."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class RootNotFoundError(NumericalError):
    """A bracketing root solve found no sign change."""


class FitError(NumericalError):
    """A curvature/least-squares fit produced an unusable result."""


class CalibrationError(NumericalError):
    """A pulse calibration did not reach its structural target."""
