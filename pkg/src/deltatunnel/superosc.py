"""Superoscillatory family F(k; N, L, x0) and the Fabry-Perot resummation.

``F(k) = [((1 - L/x0)/2) exp(i k x0/N) + ((1 + L/x0)/2) exp(-i k x0/N)]^N``
is a superposition of plane waves with shifts ``|x| <= x0``, yet near ``k = 0``
it behaves like ``exp(-ikL)`` with ``|L| > x0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, InstabilityError, ResonanceError, ValidationError
from .scatter import RESONANCE_TOL

__all__ = [
    "SuperoscSpec",
    "SuperoscReport",
    "FabryPerotSpec",
    "FabryPerotSums",
    "bracket",
    "f_eval",
    "local_wavenumber",
    "local_wavenumber_exact",
    "band_and_growth",
    "fabry_perot_sum",
]


_ZERO_BRACKET = 1e-12


@dataclass(frozen=True)
class SuperoscSpec:
    N: int
    L: float
    x0: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be an integer >= 1, got {self.N}")
        if not (np.isfinite(self.x0) and self.x0 > 0):
            raise ValidationError(f"x0 must be positive, got {self.x0}")
        if not np.isfinite(self.L):
            raise ValidationError("L must be finite")
        object.__setattr__(self, "N", int(self.N))

    @property
    def superoscillatory(self) -> bool:
        return abs(self.L) > self.x0

    @property
    def band(self) -> float:
        """``sqrt(N) / sqrt(L^2 - x0^2)``, the half-width of the superoscillating window."""
        if not self.superoscillatory:
            raise DomainError(f"|L| = {abs(self.L)} <= x0 = {self.x0}: no superoscillation band")
        return float(np.sqrt(self.N / (self.L**2 - self.x0**2)))


@dataclass(frozen=True)
class SuperoscReport:
    band: float
    count_estimate: float
    growth_ceiling: float


def bracket(spec: SuperoscSpec, k):
    """The two-wave superposition that ``F`` raises to the ``N``-th power."""
    theta = np.asarray(k, dtype=float) * spec.x0 / spec.N
    a = spec.L / spec.x0
    return 0.5 * (1 - a) * np.exp(1j * theta) + 0.5 * (1 + a) * np.exp(-1j * theta)


def f_eval(spec: SuperoscSpec, k, track_branch: bool = False):
    """Evaluate ``F(k)``.

    Single points use the direct power.  With ``track_branch=True`` and a
    1-D ``k`` path, ``F = exp(N log b)`` is built with the phase of the
    bracket ``b`` unwrapped along the path, which keeps ``arg F`` continuous.
    A vanishing bracket makes the logarithm undefined; the direct power is
    used instead.
    """
    b = bracket(spec, k)
    if not track_branch or np.ndim(b) == 0:
        return b**spec.N
    if np.any(np.abs(b) < _ZERO_BRACKET):
        warnings.warn("bracket vanishes on the path; falling back to the direct power", stacklevel=2)
        return b**spec.N
    log_b = np.log(np.abs(b)) + 1j * np.unwrap(np.angle(b))
    return np.exp(spec.N * log_b)


def local_wavenumber(spec: SuperoscSpec, k: float, dk: float) -> float:
    """Central-difference ``d arg F / dk`` at ``k``.

    The phase is accumulated as ``N`` times the (small) phase increment of
    the bracket, so no ``2 pi / N`` ambiguity arises.
    """
    if not dk > 0:
        raise DomainError(f"dk must be positive, got {dk}")
    b = bracket(spec, np.array([k - dk, k, k + dk]))
    if np.any(np.abs(b) < _ZERO_BRACKET):
        raise InstabilityError(f"|F| ~ 0 inside the stencil around k = {k}")
    steps = np.angle(b[1:] / b[:-1])
    return float(spec.N * steps.sum() / (2 * dk))


def local_wavenumber_exact(spec: SuperoscSpec, k):
    """Closed-form ``d arg F/dk = -L / (cos^2 theta + (L/x0)^2 sin^2 theta)``, ``theta = k x0/N``."""
    theta = np.asarray(k, dtype=float) * spec.x0 / spec.N
    a = spec.L / spec.x0
    return -spec.L / (np.cos(theta) ** 2 + a**2 * np.sin(theta) ** 2)


def band_and_growth(spec: SuperoscSpec) -> SuperoscReport:
    """Band half-width, the ``sqrt(N)`` count estimate and the ``(|L|/x0)^N`` ceiling of ``|F|``."""
    return SuperoscReport(
        band=spec.band,
        count_estimate=float(np.sqrt(spec.N)),
        growth_ceiling=float((abs(spec.L) / spec.x0) ** spec.N),
    )


@dataclass(frozen=True)
class FabryPerotSpec:
    """Two spikes of equal strength a distance ``L`` apart, seen at wavenumber ``k``."""

    beta: complex
    k: float
    L: float
    terms: int = 200

    def __post_init__(self):
        if int(self.terms) != self.terms or self.terms < 1:
            raise ValidationError(f"terms must be an integer >= 1, got {self.terms}")
        if not (np.isfinite(self.k) and self.k > 0):
            raise DomainError(f"k must be positive, got {self.k}")
        if self.beta == 0:
            raise DomainError("beta = 0 means no spike")

    @classmethod
    def from_strength(cls, strength, k, L, terms=200, mass=1.0, hbar=1.0) -> "FabryPerotSpec":
        return cls(1j * mass * strength / (hbar**2 * k), k, L, terms)

    @property
    def ratio(self) -> float:
        """Modulus of the common ratio of the exact series."""
        b = complex(self.beta)
        return abs(b / (1 + b)) ** 2 * abs(np.exp(2j * self.k * self.L))


@dataclass(frozen=True)
class FabryPerotSums:
    partial: complex
    closed_form: complex
    exact_partial: complex
    exact_closed: complex
    ratio: float


def fabry_perot_sum(spec: FabryPerotSpec) -> FabryPerotSums:
    """Multiple-reflection sums for the two-spike cavity.

    ``partial`` truncates the unattenuated series ``sum_j exp(2ikL)^j``, which
    does not converge: it neglects the amplitude lost at each bounce and is
    only meaningful as a truncated diagnostic.  Its formal value is
    ``closed_form = exp(-ikL) / (-2i sin kL)``.  ``exact_partial`` truncates
    the attenuated series ``(1+beta)^-2 sum_j [(beta/(1+beta))^2 exp(2ikL)]^j``
    whose sum ``exact_closed = beta^-2 / ((1 + 1/beta)^2 - exp(2ikL))`` is the
    exact two-spike transmission amplitude.
    """
    b = complex(spec.beta)
    z = np.exp(2j * spec.k * spec.L)
    j = np.arange(spec.terms)
    s = np.sin(spec.k * spec.L)
    if abs(s) < RESONANCE_TOL:
        raise ResonanceError(f"sin(kL) = 0 at k = {spec.k}; the formal closed form has a pole")
    rho = spec.ratio
    if rho >= 1:
        raise DivergenceError(f"|(beta/(1+beta))^2 exp(2ikL)| = {rho} >= 1")
    q = (b / (1 + b)) ** 2 * z
    return FabryPerotSums(
        partial=complex(np.sum(z**j)),
        closed_form=complex(np.exp(-1j * spec.k * spec.L) / (-2j * s)),
        exact_partial=complex(np.sum(q**j) / (1 + b) ** 2),
        exact_closed=complex(b**-2 / ((1 + 1 / b) ** 2 - z)),
        ratio=float(rho),
    )
