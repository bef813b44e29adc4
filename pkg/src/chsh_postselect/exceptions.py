"""Exception types shared across the package."""

from __future__ import annotations


class NotHermitianError(ValueError):
    """An operator that must be Hermitian is not, beyond tolerance."""


class DimensionMismatchError(ValueError):
    """Operator / state dimensions do not line up."""


class OutcomeOutOfRangeError(ValueError):
    """A measurement outcome value falls outside [-1, 1] beyond tolerance."""


class DegeneratePostSelectionError(ValueError):
    """The conditioning event has (numerically) zero probability.

    ``pair`` names the offending measurement pair when known, e.g. "a_prime_b".
    """

    def __init__(self, message: str, pair: str | None = None):
        super().__init__(message)
        self.pair = pair


class ScenarioParseError(ValueError):
    """Scenario file is unreadable or does not match the schema shape."""


class ScenarioValidationError(ValueError):
    """Scenario parsed fine but violates a semantic invariant."""
