"""Transmission, delay times and weak values for arrays of delta-function barriers."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DeltaTunnelError,
    DomainError,
    NumericalError,
    ResonanceError,
    SingularityError,
    ValidationError,
)
from .scatter import (  # noqa: E402
    BarrierArray,
    ScatteringResult,
    max_bandwidth,
    scattering_amplitudes,
    transfer_matrix,
    transmission_exact,
    transmission_low_energy,
)

__all__ = [
    "__version__",
    "BarrierArray",
    "ScatteringResult",
    "DeltaTunnelError",
    "DomainError",
    "NumericalError",
    "ResonanceError",
    "SingularityError",
    "ValidationError",
    "max_bandwidth",
    "scattering_amplitudes",
    "transfer_matrix",
    "transmission_exact",
    "transmission_low_energy",
]
