"""Shared exception hierarchy for the causality toolkit.

Why this design:
- One base class lets the CLI map failures to exit codes in a single place.
- Precondition failures subclass ValueError so callers can treat them as bad input.
- Numerical non-convergence is a RuntimeError carrying the iteration count and residual.
"""

from __future__ import annotations

from typing import Optional


class PqCausalError(Exception):
    """Base class for every error raised by the toolkit."""


class PreconditionError(PqCausalError, ValueError):
    """Input violates an operation's documented precondition."""


class DimensionMismatchError(PreconditionError):
    """Vector or point dimension does not match the metric signature."""


class SignatureMismatchError(PreconditionError):
    """Two metrics with different (p, q) were compared."""


class LipschitzViolationError(PreconditionError):
    """Sample data exceeds the requested Lipschitz constant."""


class InfeasibleBoundaryError(PreconditionError):
    """Boundary data is not 1-Lipschitz, so no causal filler exists."""


class SingularPointError(PreconditionError):
    """Point lies on (or too close to) the singular locus of a map."""


class SpacelikeInputError(PreconditionError):
    """A causal vector was required but a spacelike one was given."""


class DegenerateCellError(PreconditionError):
    """A grid cell has reached the light cone and has no area gradient."""

    def __init__(self, message: str, cell_index: int) -> None:
        super().__init__(message)
        self.cell_index = cell_index


class ConvergenceError(PqCausalError, RuntimeError):
    """Iterative solver stopped before meeting its tolerance."""

    def __init__(self, message: str, iterations: int = 0, residual: Optional[float] = None) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class InstanceFormatError(PqCausalError, ValueError):
    """Instance file is unreadable, not JSON, or fails schema validation."""


__all__ = [
    "PqCausalError",
    "PreconditionError",
    "DimensionMismatchError",
    "SignatureMismatchError",
    "LipschitzViolationError",
    "InfeasibleBoundaryError",
    "SingularPointError",
    "SpacelikeInputError",
    "DegenerateCellError",
    "ConvergenceError",
    "InstanceFormatError",
]
