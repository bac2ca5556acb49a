"""Exception hierarchy.

Validation problems subclass :class:`ValueError`; numerical breakdowns
subclass :class:`NumericalError` so callers (the CLI in particular) can map
them to distinct exit codes.
"""


class DeltaTunnelError(Exception):
    """Base class for all package errors."""


class ValidationError(DeltaTunnelError, ValueError):
    """Malformed input: unsorted positions, mismatched lengths, bad config."""


class DomainError(DeltaTunnelError, ValueError):
    """Argument outside the mathematical domain of an operation (k <= 0, n < 2, ...)."""


class NumericalError(DeltaTunnelError, ArithmeticError):
    """Base class for failures of a numerical procedure on valid input."""


class SingularityError(NumericalError):
    """A matrix element or denominator vanished to machine precision."""


class ResonanceError(NumericalError):
    """The low-energy formula hit a pole, sin(k * gap) ~ 0."""


class StencilError(NumericalError):
    """A finite-difference stencil straddles a phase jump; use a smaller step."""


class AccuracyError(NumericalError):
    """A quadrature self-estimate exceeded its tolerance."""


class WindowError(NumericalError):
    """A sampling window does not contain the packet."""


class InstabilityError(NumericalError):
    """Near-zero amplitude inside a phase-derivative stencil."""


class DivergenceError(NumericalError):
    """A geometric series was requested outside its radius of convergence."""


class PostSelectionError(NumericalError):
    """Pre- and post-selected states are (numerically) orthogonal."""


class PerturbationError(NumericalError):
    """First-order pointer theory is not valid for the requested coupling."""
