"""Exception types raised across the simulator."""

from __future__ import annotations


class SamplizeError(Exception):
    """Base class for all structured errors raised by this package."""


class DimensionMismatchError(SamplizeError):
    """Operands have incompatible dimensions."""

    def __init__(self, message: str, expected=None, got=None):
        super().__init__(message)
        self.expected = expected
        self.got = got


class NonHermitianError(SamplizeError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class StateValidationError(SamplizeError):
    """A vector or matrix does not satisfy the quantum-state invariants."""


class DegenerateOverlapError(SamplizeError):
    """The two states are identical up to global phase (|overlap| = 1)."""


class UnboundOracleError(SamplizeError):
    """A circuit query references an oracle index with no binding."""

    def __init__(self, index: int):
        super().__init__(f"oracle {index} has no binding")
        self.index = index


class RoundsCapExceededError(SamplizeError):
    """Calibration would need more rounds than the configured cap."""

    def __init__(self, delta: float, cap: int):
        super().__init__(
            f"calibration to delta={delta:g} exceeds the rounds cap {cap}"
        )
        self.delta = delta
        self.cap = cap


class ConfigError(SamplizeError):
    """An experiment configuration is malformed or out of the desk-scale guardrails."""


class InsufficientDataError(SamplizeError):
    """Not enough data points for the requested fit."""
