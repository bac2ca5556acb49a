"""Weak values: finite-dimensional algebra and the conditional dwell-time integral.

For pre-selected ``|i>`` and post-selected ``|f>`` the weak value of ``A`` is
``<f|A|i> / <f|i>``.  A clock coupled through ``H = P_tau X_(a,b)(x)`` is
displaced, to first order, by the weak value of the projector onto
``(a, b)`` integrated over time:

    E = int dt int_a^b dx Psi_f*(x,t) Psi_i(x,t) / <f|i>

For the transmitted sub-ensemble ``Psi_f`` is the state that ends up as the
normalised transmitted packet.  It is evolved with the same Hamiltonian as
``Psi_i``, so ``<f|i>`` does not depend on time; it is assembled from the
scattering states that leave only to the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import odd_grid, simpson_weights
from .errors import (
    AccuracyError,
    DomainError,
    PerturbationError,
    PostSelectionError,
    ValidationError,
    WindowError,
)
from .packets import SpectralAmplitude, WavePacketSpec, propagate, synthesize
from .scatter import BarrierArray, region_coefficients

__all__ = [
    "WeakValueProblem",
    "weak_value",
    "construct_states",
    "two_level_problem",
    "DwellIntegralSpec",
    "WeakDwellResult",
    "POST_SELECTIONS",
    "dwell_weak_integral",
    "PointerReadout",
    "pointer_shift",
]

POST_SELECTIONS = ("transmitted", "incident")


@dataclass(frozen=True)
class WeakValueProblem:
    pre_state: np.ndarray
    post_state: np.ndarray
    operator: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.pre_state, dtype=complex)
        f = np.asarray(self.post_state, dtype=complex)
        a = np.asarray(self.operator, dtype=complex)
        if i.ndim != 1 or i.size < 2:
            raise ValidationError("states must be vectors of dimension >= 2")
        if f.shape != i.shape or a.shape != (i.size, i.size):
            raise ValidationError("state and operator dimensions disagree")
        for name, v in (("pre_state", i), ("post_state", f)):
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ValidationError(f"{name} is not unit-normalised (norm {np.linalg.norm(v)})")
        if np.max(np.abs(a - a.conj().T)) > 1e-12:
            raise ValidationError("operator is not Hermitian")
        object.__setattr__(self, "pre_state", i)
        object.__setattr__(self, "post_state", f)
        object.__setattr__(self, "operator", a)

    @property
    def dim(self) -> int:
        return self.pre_state.size


def weak_value(problem: WeakValueProblem) -> complex:
    overlap = np.vdot(problem.post_state, problem.pre_state)
    if abs(overlap) <= 1e-12:
        raise PostSelectionError(f"<f|i> = {overlap:.3g}: post-selection is singular")
    return complex(np.vdot(problem.post_state, problem.operator @ problem.pre_state) / overlap)


def construct_states(z: complex, a1: float, a2: float) -> tuple[complex, complex]:
    """Amplitudes ``(alpha1, alpha2)`` of ``|i>`` giving weak value ``z``.

    The observable is ``diag(a1, a2)`` and ``|f> = (|a1> + |a2>)/sqrt(2)``.
    Solving ``(alpha1 a1 + alpha2 a2)/(alpha1 + alpha2) = z`` gives
    ``alpha2/alpha1 = (z - a1)/(a2 - z)``; ``z = a2`` is the limit ``(0, 1)``.
    """
    if a1 == a2:
        raise DomainError("a1 == a2: a degenerate observable has a single weak value")
    z = complex(z)
    if z == a2:
        return 0j, 1 + 0j
    ratio = (z - a1) / (a2 - z)
    norm = np.sqrt(1 + abs(ratio) ** 2)
    return complex(1 / norm), complex(ratio / norm)


def two_level_problem(alphas, a1: float, a2: float) -> WeakValueProblem:
    """Two-level set-up with ``A = diag(a1, a2)`` and ``|f> = (1, 1)/sqrt(2)``."""
    return WeakValueProblem(
        np.asarray(alphas, dtype=complex),
        np.array([1, 1], dtype=complex) / np.sqrt(2),
        np.diag([a1, a2]).astype(complex),
    )


@dataclass(frozen=True)
class DwellIntegralSpec:
    """Conditional dwell time of ``packet`` in ``region`` for the chosen post-selection.

    ``post_selection="incident"`` sets ``|f> = |i>`` (no conditioning);
    ``"transmitted"`` conditions on transmission.  ``t_window=None`` picks a
    window automatically so that the packets' weight in the region at the
    endpoints is below ``tail_tol`` of its peak.
    """

    packet: WavePacketSpec
    barriers: BarrierArray
    region: tuple[float, float] | None = None
    post_selection: str = "transmitted"
    t_window: tuple[float, float] | None = None
    x_points: int = 129
    t_points: int = 2001
    k_points: int = 1025
    tail_tol: float = 1e-6
    drift_tol: float = 1e-6

    def __post_init__(self):
        if self.post_selection not in POST_SELECTIONS:
            raise ValidationError(
                f"post_selection must be one of {POST_SELECTIONS}, got {self.post_selection!r}"
            )
        a, b = self.bounds
        if b < a:
            raise ValidationError(f"region ({a}, {b}) is reversed")
        if self.t_window is not None and not self.t_window[1] > self.t_window[0]:
            raise ValidationError(f"t_window {self.t_window} is empty")

    @property
    def bounds(self) -> tuple[float, float]:
        if self.region is None:
            return 0.0, self.barriers.span
        return float(self.region[0]), float(self.region[1])


@dataclass(frozen=True)
class WeakDwellResult:
    value: complex
    numerator: complex
    denominator: complex
    denominator_drift: float
    spectral_denominator: complex
    t_window: tuple[float, float]
    tail_fraction: float

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class _States:
    amp_i: SpectralAmplitude
    coeffs_i: np.ndarray
    amp_f: SpectralAmplitude
    coeffs_f: np.ndarray
    overlap: complex


def _states(spec: DwellIntegralSpec) -> _States:
    amp = synthesize(spec.packet, spec.packet.k_grid(spec.k_points))
    t, _, coeffs_i = region_coefficients(spec.barriers, amp.k)
    if spec.post_selection == "incident":
        return _States(amp, coeffs_i, amp, coeffs_i, 1 + 0j)
    h = amp.scaled(t)
    norm = np.sqrt(h.norm)
    if not norm > 0:
        raise PostSelectionError("nothing is transmitted")
    h = SpectralAmplitude(h.k, h.g / norm)
    _, _, coeffs_f = region_coefficients(spec.barriers, amp.k, outgoing=True)
    overlap = complex(np.sum(amp.weights * np.conj(h.g) * t * amp.g))
    return _States(amp, coeffs_i, h, coeffs_f, overlap)


def _fields(states, barriers, x, t, check=True):
    psi_i = propagate(states.amp_i, barriers, x, t, coefficients=states.coeffs_i, check=check)
    psi_f = propagate(states.amp_f, barriers, x, t, coefficients=states.coeffs_f, check=check)
    return psi_i.values, psi_f.values


def _region_mass(states, barriers, x, t):
    # Only used to locate tails, so the quadrature self-check is skipped.
    w = simpson_weights(x)
    vi, vf = _fields(states, barriers, x, t, check=False)
    return (np.abs(vi) ** 2) @ w, (np.abs(vf) ** 2) @ w


def _packet_scales(spec):
    p, b = spec.packet, spec.barriers
    v0 = b.hbar * p.k0 / b.mass
    mid = 0.5 * sum(spec.bounds)
    return v0, (mid - p.x_center) / v0


def _width_at(spec, t):
    p, b = spec.packet, spec.barriers
    w0 = p.width
    return w0 * np.sqrt(1 + (b.hbar * t / (2 * b.mass * w0**2)) ** 2)


def _auto_window(spec, states, x):
    v0, t_c = _packet_scales(spec)
    half = 6 * spec.packet.width / v0
    peak_i, peak_f = _region_mass(states, spec.barriers, x, np.array([t_c]))
    for _ in range(16):
        ends = np.array([t_c - half, t_c + half])
        mi, mf = _region_mass(states, spec.barriers, x, ends)
        if max(np.max(mi) / peak_i[0], np.max(mf) / peak_f[0]) < spec.tail_tol / 10:
            return float(ends[0]), float(ends[1])
        half *= 1.5
    raise WindowError("could not find a time window containing the packets")


def _overlap_at(spec, states, t_ref):
    """``<f|i>`` as an x-integral at time ``t_ref``.

    Simpson is applied piecewise between spikes: the eigenstates have kinks
    there, which would otherwise cost several digits.
    """
    p, b = spec.packet, spec.barriers
    k_max = states.amp_i.k[-1]
    reach = b.hbar * k_max / b.mass * abs(t_ref) + 14 * _width_at(spec, t_ref)
    lo = min(p.x_center, 0.0) - reach
    hi = max(p.x_center, b.span) + reach
    # the integrand carries exp(2ikx); Simpson needs ~30 nodes per period
    dx = np.pi / (64 * k_max)
    edges = np.concatenate([[lo], b.positions, [hi]])
    total = 0j
    for x0, x1 in zip(edges[:-1], edges[1:]):
        x = odd_grid(x0, x1, (x1 - x0) / dx + 3)
        vi, vf = _fields(states, b, x, np.array([t_ref]), check=False)
        total += np.sum(simpson_weights(x) * np.conj(vf[0]) * vi[0])
    return complex(total)


def dwell_weak_integral(spec: DwellIntegralSpec) -> WeakDwellResult:
    """Weak value of the region projector integrated over time.

    The numerator is Simpson in ``x`` over the region, then Simpson in
    ``t`` over the window.  The denominator ``<f|i>`` is an ``x``-integral
    at two times inside the window; their relative difference is
    ``denominator_drift`` and must stay below ``drift_tol``.
    """
    a, b = spec.bounds
    states = _states(spec)
    if abs(states.overlap) < 1e-10:
        raise PostSelectionError(f"|<f|i>| = {abs(states.overlap):.2e} < 1e-10")
    if b == a:
        return WeakDwellResult(0j, 0j, states.overlap, 0.0, states.overlap, (0.0, 0.0), 0.0)
    x = odd_grid(a, b, spec.x_points)
    if spec.t_window is None:
        t0, t1 = _auto_window(spec, states, x)
    else:
        t0, t1 = spec.t_window
    tt = odd_grid(t0, t1, spec.t_points)
    vi, vf = _fields(states, spec.barriers, x, tt)
    wx = simpson_weights(x)
    mi = (np.abs(vi) ** 2) @ wx
    mf = (np.abs(vf) ** 2) @ wx
    tail = float(max(mi[0], mi[-1], mf[0], mf[-1]) / max(np.max(mi), np.max(mf)))
    if tail > spec.tail_tol:
        raise WindowError(
            f"region weight at the window edges is {tail:.2e} of its peak (> {spec.tail_tol:.0e})"
        )
    numerator = complex(simpson_weights(tt) @ ((np.conj(vf) * vi) @ wx))

    _, t_c = _packet_scales(spec)
    t_c = min(max(t_c, t0), t1)
    d1 = _overlap_at(spec, states, t_c)
    d2 = _overlap_at(spec, states, 0.5 * (t_c + t1))
    if abs(d1) < 1e-10:
        raise PostSelectionError(f"|<f|i>| = {abs(d1):.2e} < 1e-10")
    drift = abs(d2 - d1) / abs(d1)
    if drift > spec.drift_tol:
        raise AccuracyError(f"<f|i> drifts by {drift:.2e} between reference times")
    return WeakDwellResult(
        value=numerator / d1,
        numerator=numerator,
        denominator=d1,
        denominator_drift=float(drift),
        spectral_denominator=states.overlap,
        t_window=(float(t0), float(t1)),
        tail_fraction=tail,
    )


@dataclass(frozen=True)
class PointerReadout:
    position_shift: float
    imaginary_part: float
    momentum_shift: float
    coupling_ratio: float


def pointer_shift(
    integral: complex, sigma_tau: float, hbar: float = 1.0, points: int = 8192
) -> PointerReadout:
    """Displace a Gaussian clock pointer by ``exp(-i E P_tau / hbar)`` and read it out.

    The translation is applied in momentum space and the pointer's mean
    position and momentum are measured on the grid.  The mean position moves
    by ``Re E``; ``Im E`` instead shifts the mean momentum (by
    ``hbar Im E / (2 sigma_tau^2)``) and is returned separately.  First-order
    pointer theory needs ``|E| sigma_p / hbar = |E| / (2 sigma_tau) < 0.1``.
    """
    if not sigma_tau > 0:
        raise DomainError(f"sigma_tau must be positive, got {sigma_tau}")
    e = complex(integral)
    ratio = abs(e) / (2 * sigma_tau)
    if ratio >= 0.1:
        raise PerturbationError(
            f"coupling ratio |E|/(2 sigma_tau) = {ratio:.3g} >= 0.1; widen the pointer"
        )
    half = 16 * sigma_tau + 2 * abs(e.real)
    tau = np.linspace(-half, half, points, endpoint=False)
    dtau = tau[1] - tau[0]
    p = 2 * np.pi * hbar * np.fft.fftfreq(points, d=dtau)
    # Analytic pointer spectrum and translation in one exponent: sampling the
    # spectrum by FFT leaves a round-off floor that exp(Im E p) would amplify.
    spec = np.exp(-((sigma_tau * p / hbar) ** 2) - 1j * e * p / hbar)
    moved = np.fft.ifft(spec * np.exp(1j * p * tau[0] / hbar))
    rho = np.abs(moved) ** 2
    rho_p = np.abs(spec) ** 2
    return PointerReadout(
        position_shift=float(np.sum(tau * rho) / np.sum(rho)),
        imaginary_part=float(e.imag),
        momentum_shift=float(np.sum(p * rho_p) / np.sum(rho_p)),
        coupling_ratio=float(ratio),
    )
