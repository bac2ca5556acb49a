"""Wave packets built from exact scattering eigenstates.

A packet with spectral amplitude ``g(k)`` (``k > 0``, ``int |g|^2 dk = 1``) is

    Psi(x, t) = (2 pi)^(-1/2) int g(k) psi_k(x) exp(-i hbar k^2 t / 2m) dk

where ``psi_k`` is the left-incident eigenstate.  Deltas are handled exactly
this way, which a finite-difference grid cannot do.  The k-integral is a
composite Simpson rule whose error is estimated by dropping every other node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import odd_grid, simpson_weights
from .errors import AccuracyError, DomainError, ValidationError, WindowError
from .scatter import BarrierArray, evaluate_eigenfunctions, region_coefficients, scattering_amplitudes

__all__ = [
    "WavePacketSpec",
    "SpectralAmplitude",
    "FieldSample",
    "ArrivalReport",
    "FlatnessReport",
    "SIDES",
    "synthesize",
    "spectral_amplitude",
    "propagate",
    "free_gaussian",
    "arrival_distribution",
    "incident_derivative",
    "shape_score",
    "derivative_shape_score",
    "spectral_flatness",
]

SIDES = ("full", "left_of_barriers", "right_of_barriers")
_SQRT_2PI = np.sqrt(2 * np.pi)


@dataclass(frozen=True)
class WavePacketSpec:
    """Gaussian spectral envelope ``exp(-(k - k0)^2 / (4 dk^2))``.

    ``dk`` is the standard deviation of ``|g|^2``.  The free incident packet
    is centred on ``x_center`` at ``t = 0``.
    """

    k0: float
    dk: float
    shape: str = "gaussian"
    x_center: float = 0.0

    def __post_init__(self):
        if self.shape != "gaussian":
            raise ValidationError(f"unknown packet shape {self.shape!r}; only 'gaussian' is built in")
        if not (np.isfinite(self.k0) and self.k0 > 0):
            raise ValidationError(f"k0 must be positive, got {self.k0}")
        if not (np.isfinite(self.dk) and self.dk > 0):
            raise ValidationError(f"dk must be positive, got {self.dk}")
        if self.k0 < 5 * self.dk:
            raise ValidationError(
                f"k0 = {self.k0} < 5 dk = {5 * self.dk}: spectrum leaks to k <= 0"
            )

    @property
    def width(self) -> float:
        """Position-space standard deviation at the focus, ``1 / (2 dk)``."""
        return 1.0 / (2 * self.dk)

    def k_grid(self, points: int = 1025) -> np.ndarray:
        lo = max(self.k0 - 6 * self.dk, 1e-6 * self.dk)
        return odd_grid(lo, self.k0 + 6 * self.dk, points)


@dataclass(frozen=True)
class SpectralAmplitude:
    """Sampled ``g(k)`` on a uniform, odd-sized grid of positive wavenumbers."""

    k: np.ndarray
    g: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return simpson_weights(self.k)

    @property
    def norm(self) -> float:
        return float(np.sum(self.weights * np.abs(self.g) ** 2))

    @property
    def mean_k(self) -> float:
        return float(np.sum(self.weights * self.k * np.abs(self.g) ** 2) / self.norm)

    def halved(self) -> "SpectralAmplitude":
        if (self.k.size - 1) % 4:
            raise ValidationError("grid-halving needs (points - 1) divisible by 4")
        return SpectralAmplitude(self.k[::2], self.g[::2])

    def scaled(self, factor) -> "SpectralAmplitude":
        """Pointwise product with ``factor`` (an array on the same grid)."""
        return SpectralAmplitude(self.k, self.g * factor)


def spectral_amplitude(k, g, normalize: bool = True) -> SpectralAmplitude:
    """Wrap arbitrary samples ``g(k)``; the hook for envelopes other than Gaussian."""
    k = np.asarray(k, dtype=float)
    g = np.asarray(g, dtype=complex)
    if k.shape != g.shape or k.ndim != 1:
        raise ValidationError("k and g must be 1-D arrays of equal length")
    if np.any(k <= 0):
        raise DomainError("spectral support must be k > 0 (left-incident packets)")
    amp = SpectralAmplitude(k, g)
    if normalize:
        amp = SpectralAmplitude(k, g / np.sqrt(amp.norm))
    return amp


def synthesize(spec: WavePacketSpec, k_grid=None) -> SpectralAmplitude:
    """Normalised Gaussian ``g(k)`` on ``k_grid`` (default: 1025 points over k0 +- 6 dk)."""
    if k_grid is None:
        k_grid = spec.k_grid()
    k = np.asarray(k_grid, dtype=float)
    if k.size < 512:
        raise ValidationError(f"k grid needs >= 512 points, got {k.size}")
    lo = max(spec.k0 - 6 * spec.dk, 0.0)
    if k[0] > lo + 1e-12 * spec.k0 + 1e-6 * spec.dk or k[-1] < spec.k0 + 6 * spec.dk * (1 - 1e-12):
        raise ValidationError(
            f"k grid [{k[0]}, {k[-1]}] does not cover [{lo}, {spec.k0 + 6 * spec.dk}]"
        )
    g = np.exp(-((k - spec.k0) ** 2) / (4 * spec.dk**2) - 1j * k * spec.x_center)
    return spectral_amplitude(k, g)


@dataclass
class FieldSample:
    """``values[i, j] = Psi(x[j], t[i])``."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    side: str = "full"
    error_estimate: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norms(self) -> np.ndarray:
        """``int |Psi|^2 dx`` at each sampled time (Simpson in x)."""
        return self.density() @ simpson_weights(self.x)

    def column(self, x_star: float) -> np.ndarray:
        j = int(np.argmin(np.abs(self.x - x_star)))
        spacing = np.min(np.diff(self.x)) if self.x.size > 1 else 1.0
        if abs(self.x[j] - x_star) > 1e-9 * max(1.0, spacing):
            raise ValidationError(f"x = {x_star} is not a sampled position")
        return self.values[:, j]


def _branch_coefficients(barriers, k, side):
    t, r, coeffs = region_coefficients(barriers, k)
    if side == "full":
        return coeffs, barriers
    # A single-region scene whose only region carries the chosen branch,
    # i.e. the asymptotic form continued analytically to every x.
    one = np.empty((k.size, 1, 2), dtype=complex)
    if side == "right_of_barriers":
        one[:, 0, 0], one[:, 0, 1] = t, 0
    else:
        one[:, 0, 0], one[:, 0, 1] = 1, r
    return one, BarrierArray(mass=barriers.mass, hbar=barriers.hbar)


def _superpose(amp, coeffs, scene, x, t, chunk):
    w = amp.weights * amp.g / _SQRT_2PI
    omega = scene.hbar * amp.k**2 / (2 * scene.mass)
    phase = np.exp(-1j * np.outer(t, omega))
    out = np.empty((t.size, x.size), dtype=complex)
    for s in range(0, x.size, chunk):
        psi = evaluate_eigenfunctions(scene, amp.k, coeffs, x[s : s + chunk])
        out[:, s : s + chunk] = phase @ (w[:, None] * psi)
    return out


def propagate(
    amp: SpectralAmplitude,
    barriers: BarrierArray,
    x,
    t,
    side: str = "full",
    tol: float = 1e-5,
    check: bool = True,
    coefficients=None,
) -> FieldSample:
    """Sample ``Psi(x, t)`` by Simpson quadrature over exact eigenstates.

    ``side="right_of_barriers"`` keeps only the transmitted branch
    ``t(k) exp(ikx)`` and ``side="left_of_barriers"`` only
    ``exp(ikx) + r(k) exp(-ikx)``, each continued to every ``x``; they agree
    with ``"full"`` on their own side of the array.

    The quadrature is repeated on every other k-node; a relative change above
    ``tol`` raises :class:`AccuracyError`.  ``coefficients`` may supply
    precomputed region coefficients (shape ``(len(k), n+1, 2)``) for states
    other than the left-incident one.
    """
    if side not in SIDES:
        raise ValidationError(f"side must be one of {SIDES}, got {side!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise ValidationError("x and t grids must be finite")
    if coefficients is None:
        coeffs, scene = _branch_coefficients(barriers, amp.k, side)
    else:
        coeffs, scene = coefficients, barriers
    chunk = max(1, int(2**22 // max(amp.k.size, 1)))
    values = _superpose(amp, coeffs, scene, x, t, chunk)
    err = 0.0
    if check:
        half = amp.halved()
        coarse = _superpose(half, coeffs[::2], scene, x, t, chunk)
        scale = np.max(np.abs(values))
        err = float(np.max(np.abs(values - coarse)) / scale) if scale > 0 else 0.0
        if err > tol:
            raise AccuracyError(
                f"k-quadrature self-estimate {err:.2e} exceeds {tol:.0e}; refine the k grid"
            )
    return FieldSample(x, t, values, side, err, barriers.mass, barriers.hbar)


def free_gaussian(spec: WavePacketSpec, x, t, mass: float = 1.0, hbar: float = 1.0):
    """Closed-form free evolution of the Gaussian packet (full-line spectrum).

    Differs from the ``k > 0`` truncated packet by ``O(erfc(k0 / 2dk))``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    a = 1 / (4 * spec.dk**2) + 1j * hbar * t / (2 * mass)
    b = spec.k0 / (2 * spec.dk**2) + 1j * (x - spec.x_center)
    pref = (2 * np.pi * spec.dk**2) ** -0.25 / _SQRT_2PI * np.sqrt(np.pi / a)
    return pref * np.exp(b**2 / (4 * a) - spec.k0**2 / (4 * spec.dk**2))


@dataclass(frozen=True)
class ArrivalReport:
    t: np.ndarray
    density: np.ndarray
    peak_time: float
    mean_time: float


def arrival_distribution(
    field: FieldSample, x_star: float, edge_fraction: float = 0.05, max_edge_mass: float = 1e-3
) -> ArrivalReport:
    """Normalised ``|Psi(x_star, t)|^2`` over the sampled times, with its peak and mean.

    The peak is refined by a parabola through the three largest-neighbourhood
    samples.  More than ``max_edge_mass`` of the distribution within the
    outer ``edge_fraction`` of the window on either side raises
    :class:`WindowError`.
    """
    t = field.t
    w = simpson_weights(t)
    dens = np.abs(field.column(x_star)) ** 2
    total = float(np.sum(w * dens))
    if not total > 0:
        raise WindowError(f"no probability reaches x = {x_star} in the window")
    p = dens / total
    m = max(1, int(np.ceil(edge_fraction * t.size)))
    dt = t[1] - t[0]
    edge = max(np.sum(p[:m]), np.sum(p[-m:])) * dt
    if edge > max_edge_mass:
        raise WindowError(
            f"{edge:.2e} of the arrival distribution sits at the window edge; widen the t grid"
        )
    i = int(np.argmax(p))
    if i == 0 or i == t.size - 1:
        raise WindowError("arrival peak at the window edge")
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    denom = y0 - 2 * y1 + y2
    shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    return ArrivalReport(
        t=t,
        density=p,
        peak_time=float(t[i] + shift * dt),
        mean_time=float(np.sum(w * t * p)),
    )


def incident_derivative(amp: SpectralAmplitude, x, t: float, shift: float = 0.0, mass=1.0, hbar=1.0):
    """``d/dx`` of the free incident packet, evaluated at ``x - shift`` and time ``t``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = amp.weights * amp.g * 1j * amp.k / _SQRT_2PI
    w = w * np.exp(-1j * hbar * amp.k**2 * t / (2 * mass))
    chunk = max(1, int(2**22 // amp.k.size))
    out = np.empty(x.size, dtype=complex)
    for s in range(0, x.size, chunk):
        out[s : s + chunk] = np.exp(1j * np.outer(x[s : s + chunk] - shift, amp.k)) @ w
    return out


def shape_score(a, b, weights=None) -> float:
    """``|<a, b>| / (|a| |b|)``: 1 when the profiles are proportional."""
    a = np.asarray(a)
    b = np.asarray(b)
    w = np.ones(a.shape) if weights is None else np.asarray(weights)
    na = np.sum(w * np.abs(a) ** 2)
    nb = np.sum(w * np.abs(b) ** 2)
    if not (na > 0 and nb > 0):
        raise ValidationError("shape score of a zero-norm profile is undefined")
    return float(min(1.0, abs(np.sum(w * np.conj(a) * b)) / np.sqrt(na * nb)))


def derivative_shape_score(
    field: FieldSample, incident: SpectralAmplitude, shift: float, time_index: int = -1
) -> float:
    """Overlap of the transmitted profile with ``phi'(x - shift)`` at one sampled time.

    ``phi`` is the free incident packet built from ``incident``.  Use a time
    after the packet has left the array and an ``x`` grid on the
    transmitted side.
    """
    profile = field.values[time_index]
    ref = incident_derivative(incident, field.x, field.t[time_index], shift, field.mass, field.hbar)
    return shape_score(ref, profile, simpson_weights(field.x))


@dataclass(frozen=True)
class FlatnessReport:
    k_range: tuple[float, float]
    magnitude_deviation: float
    phase_residual: float
    phase_slope: float
    crosses_resonance: bool


def spectral_flatness(
    barriers: BarrierArray, k0: float, band: float, points: int = 257
) -> FlatnessReport:
    """How far ``u(k) = t(k) exp(ikL_n)`` is from flat over ``[k0 - band, k0 + band]``.

    ``magnitude_deviation`` is ``max | |u|/|u(k0)| - 1 |``; ``phase_residual``
    is the largest deviation of the unwrapped phase of ``u`` from its
    least-squares line.  The interval is clipped to ``k > 0``.  A resonance
    of some gap inside the interval is flagged, not fatal.
    """
    if not band > 0:
        raise DomainError(f"band must be positive, got {band}")
    if not k0 > 0:
        raise DomainError(f"k0 must be positive, got {k0}")
    if points < 128:
        raise ValidationError(f"need >= 128 points, got {points}")
    lo = max(k0 - band, 1e-6 * band)
    hi = k0 + band
    k = np.linspace(lo, hi, points)
    u = scattering_amplitudes(barriers, k)[0] * np.exp(1j * k * barriers.span)
    u0 = scattering_amplitudes(barriers, k0)[0] * np.exp(1j * k0 * barriers.span)
    mag = float(np.max(np.abs(np.abs(u) / abs(u0) - 1)))
    ph = np.unwrap(np.angle(u))
    slope, icpt = np.polyfit(k, ph, 1)
    resid = float(np.max(np.abs(ph - (slope * k + icpt))))
    gaps = barriers.gaps
    crosses = bool(np.any(np.floor(hi * gaps / np.pi) > np.floor(lo * gaps / np.pi)))
    return FlatnessReport((float(lo), float(hi)), mag, resid, float(slope), crosses)
