"""Exception hierarchy shared by every module."""

from __future__ import annotations


class SynthesisError(Exception):
    """Base class for all package errors."""


class ArgumentError(SynthesisError, ValueError):
    """Malformed arguments: empty/overlapping variable sets, bad parameters."""


class DimensionError(SynthesisError, ValueError):
    """Two objects that must share variables or alphabets do not."""


class DistributionError(SynthesisError, ValueError):
    """Mass is negative, does not sum to one, or has an impossible support."""


class CapacityError(SynthesisError):
    """A state space or index space exceeds its configured guard."""

    def __init__(self, message: str, required: int | None = None, guard: int | None = None):
        super().__init__(message)
        self.required = required
        self.guard = guard


class NumericalError(SynthesisError, ArithmeticError):
    """An information quantity came out negative beyond round-off."""


class ConstraintError(SynthesisError):
    """A coupling violates a Markov chain, functional dependence or marginal."""

    def __init__(self, message: str, failed: str | None = None, deviation: float | None = None):
        super().__init__(message)
        self.failed = failed
        self.deviation = deviation


class SearchFailure(SynthesisError):
    """The coupling search found no point meeting the feasibility tolerance."""

    def __init__(self, message: str, best_deviation: float):
        super().__init__(message)
        self.best_deviation = best_deviation


class DegeneratePosteriorError(SynthesisError):
    """A source block has zero likelihood under every codeword."""
