"""
Exception types raised by holism_lab.

Every error derives from :class:`LabError`, so callers can catch the whole
family at once. Messages always name the offending input.
"""


class LabError(Exception):
    """Base class for every error raised by holism_lab."""


class DimensionMismatchError(LabError, ValueError):
    """Raised when two operands act on a different number of qubits."""


class NonHermitianError(LabError, ValueError):
    """Raised when an expectation is requested for a phase of ±i."""


class CapExceededError(LabError, ValueError):
    """Raised when a size exceeds a configured cap (dense, solver or holism)."""


class InvalidInputError(LabError, ValueError):
    """Raised for malformed user input. ``field`` names the offending field."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class InsufficientDataError(LabError, ValueError):
    """Raised when a series or record is too short for the requested statistic."""


class InfeasibleSystemError(LabError):
    """Raised when an operation needs a feasible moment system and got none."""


class ConfigError(LabError):
    """Raised when a configuration value violates its invariant."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"config {field}: {message}")
        self.field = field
