"""Stationary scattering through an array of delta-function barriers.

The potential is ``V(x) = sum_i alpha_i * delta(x - L_i)`` with ``L_1 = 0``,
optionally plus a constant ``V0`` on ``(L_1, L_n)``.  Outside the array the
wavefunction is ``A exp(ikx) + B exp(-ikx)`` (left) and ``C exp(ikx) + D exp(-ikx)``
(right), and the transfer matrix maps ``(C, D) -> (A, B)``.

Each spike contributes the factor ``I + beta_i * P(L_i)`` with

    P(L) = [[1, exp(-2ikL)], [-exp(2ikL), -1]],   beta_i = i m alpha_i / (hbar^2 k)

This is the sign of ``beta`` that reproduces the derivative jump
``psi'(L+) - psi'(L-) = (2 m alpha / hbar^2) psi(L)`` for a repulsive spike.
With it, a lone spike transmits ``1 / (1 + beta)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, ResonanceError, SingularityError, ValidationError

__all__ = [
    "BarrierArray",
    "ScatteringResult",
    "LowEnergyWarning",
    "transfer_matrix",
    "transfer_matrices",
    "transmission_exact",
    "transmission_low_energy",
    "scattering_amplitudes",
    "region_coefficients",
    "evaluate_eigenfunctions",
    "packet_coefficient",
    "packet_coefficient_low_energy",
    "packet_coefficient_series",
    "max_bandwidth",
]

RESONANCE_TOL = 1e-8


class LowEnergyWarning(UserWarning):
    """Emitted when the low-energy formula is used with |beta| not much larger than n."""


@dataclass(frozen=True)
class BarrierArray:
    """Delta spikes at ``positions`` with strengths ``strengths`` (energy x length).

    ``inner_potential`` is a constant potential on ``(positions[0], positions[-1])``
    and needs at least two spikes to have a region to live in.  Zero-strength
    spikes are allowed; ``BarrierArray([0, L], [0, 0], inner_potential=V0)`` is a
    plain rectangular step of length ``L``.
    """

    positions: tuple[float, ...] = ()
    strengths: tuple[float, ...] = ()
    mass: float = 1.0
    hbar: float = 1.0
    inner_potential: float = 0.0

    def __post_init__(self):
        pos = tuple(float(p) for p in np.atleast_1d(np.asarray(self.positions, dtype=float)))
        alp = tuple(float(a) for a in np.atleast_1d(np.asarray(self.strengths, dtype=float)))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "strengths", alp)
        if len(pos) != len(alp):
            raise ValidationError(
                f"positions ({len(pos)}) and strengths ({len(alp)}) differ in length"
            )
        if not all(np.isfinite(pos)) or not all(np.isfinite(alp)):
            raise ValidationError("positions and strengths must be finite")
        if pos and pos[0] != 0.0:
            raise ValidationError(f"first position must be 0, got {pos[0]}")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValidationError("positions must be strictly increasing")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ValidationError(f"mass must be positive, got {self.mass}")
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if not np.isfinite(self.inner_potential):
            raise ValidationError("inner_potential must be finite")
        if self.inner_potential != 0.0 and len(pos) < 2:
            raise ValidationError("inner_potential needs at least two spikes to bound it")

    @classmethod
    def equally_spaced(cls, n, length, strength, **kwargs) -> "BarrierArray":
        """``n`` identical spikes spread evenly over ``[0, length]`` (gap ``length/(n-1)``)."""
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {n}")
        if n == 1:
            return cls((0.0,), (float(strength),), **kwargs)
        return cls(tuple(np.linspace(0.0, length, n)), (float(strength),) * n, **kwargs)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def span(self) -> float:
        """``L_n``, the position of the last spike (0 for an empty array)."""
        return self.positions[-1] if self.positions else 0.0

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(np.asarray(self.positions))

    def energy(self, k):
        return self.hbar**2 * np.asarray(k) ** 2 / (2 * self.mass)

    def wavenumber(self, energy):
        return np.sqrt(2 * self.mass * np.asarray(energy)) / self.hbar

    def velocity(self, k):
        return self.hbar * np.asarray(k) / self.mass

    def beta(self, k) -> np.ndarray:
        """Dimensionless spike strengths ``i m alpha / (hbar^2 k)``, shape ``(..., n)``."""
        k = np.asarray(k, dtype=float)[..., None]
        return 1j * self.mass * np.asarray(self.strengths) / (self.hbar**2 * k)

    def inner_wavenumber(self, k) -> np.ndarray:
        """``k' = sqrt(2m(E - V0))/hbar`` on the principal branch (Im k' >= 0)."""
        k = np.asarray(k, dtype=float)
        kp = np.sqrt(k.astype(complex) ** 2 - 2 * self.mass * self.inner_potential / self.hbar**2)
        if np.any(kp == 0):
            raise SingularityError("E equals the inner potential; k' = 0 has no plane-wave basis")
        return kp

    def region_wavenumbers(self, k) -> np.ndarray:
        """Local wavenumber in each of the ``n + 1`` regions, shape ``(..., n + 1)``."""
        k = np.asarray(k, dtype=float)
        q = np.repeat(k[..., None].astype(complex), self.n + 1, axis=-1)
        if self.inner_potential != 0.0:
            q[..., 1:-1] = self.inner_wavenumber(k)[..., None]
        return q

    def with_inner_potential(self, v0: float) -> "BarrierArray":
        return replace(self, inner_potential=float(v0))


@dataclass
class ScatteringResult:
    """Left-incident stationary state at wavenumber ``k``.

    ``region_coeffs[j] = (A_j, B_j)`` multiplies ``exp(+-i q_j x)`` in region
    ``j``; region 0 is ``x < L_1`` and region ``n`` is ``x > L_n``.
    """

    k: float
    t: complex
    r: complex
    region_coeffs: np.ndarray
    barriers: BarrierArray = field(repr=False)

    @property
    def transmission(self) -> float:
        return abs(self.t) ** 2

    @property
    def reflection(self) -> float:
        return abs(self.r) ** 2

    def wavefunction(self, x) -> np.ndarray:
        return evaluate_eigenfunctions(
            self.barriers, np.array([self.k]), self.region_coeffs[None], x
        )[0]

    def derivative(self, x, region=None) -> np.ndarray:
        """``psi'(x)``; ``region`` forces the branch used (for one-sided limits at a spike)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        q = self.barriers.region_wavenumbers(self.k)
        j = _region_index(self.barriers, x) if region is None else np.full(x.shape, region)
        a, b = self.region_coeffs[j, 0], self.region_coeffs[j, 1]
        return 1j * q[j] * (a * np.exp(1j * q[j] * x) - b * np.exp(-1j * q[j] * x))


def _check_k(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(k)) or np.any(k <= 0):
        raise DomainError(f"wavenumber must be positive and finite, got {k}")
    return k


def _spike_factors(barriers: BarrierArray, k: np.ndarray) -> np.ndarray:
    """Per-spike transfer factors, shape ``(n, *k.shape, 2, 2)``."""
    n = barriers.n
    out = np.empty((n,) + k.shape + (2, 2), dtype=complex)
    if n == 0:
        return out
    if barriers.inner_potential == 0.0:
        beta = np.moveaxis(barriers.beta(k), -1, 0)
        L = np.asarray(barriers.positions).reshape((n,) + (1,) * k.ndim)
        ph = np.exp(2j * k * L)
        out[..., 0, 0] = 1 + beta
        out[..., 0, 1] = beta / ph
        out[..., 1, 0] = -beta * ph
        out[..., 1, 1] = 1 - beta
        return out
    # General interface matching: D(q_left, L)^-1 @ J(alpha) @ D(q_right, L),
    # D(q, L) maps (A, B) to (psi, psi') at x = L.
    q = np.moveaxis(barriers.region_wavenumbers(k), -1, 0)
    jump = 2 * barriers.mass / barriers.hbar**2
    for i, (L, alpha) in enumerate(zip(barriers.positions, barriers.strengths)):
        qa, qb = q[i], q[i + 1]
        d_right = np.empty(k.shape + (2, 2), dtype=complex)
        d_right[..., 0, 0] = np.exp(1j * qb * L)
        d_right[..., 0, 1] = np.exp(-1j * qb * L)
        d_right[..., 1, 0] = 1j * qb * np.exp(1j * qb * L)
        d_right[..., 1, 1] = -1j * qb * np.exp(-1j * qb * L)
        d_right[..., 1, :] -= jump * alpha * d_right[..., 0, :]
        d_left_inv = np.empty(k.shape + (2, 2), dtype=complex)
        d_left_inv[..., 0, 0] = 0.5 * np.exp(-1j * qa * L)
        d_left_inv[..., 0, 1] = np.exp(-1j * qa * L) / (2j * qa)
        d_left_inv[..., 1, 0] = 0.5 * np.exp(1j * qa * L)
        d_left_inv[..., 1, 1] = -np.exp(1j * qa * L) / (2j * qa)
        out[i] = d_left_inv @ d_right
    return out


def transfer_matrices(barriers: BarrierArray, k) -> np.ndarray:
    """Vectorised :func:`transfer_matrix`; returns shape ``(*k.shape, 2, 2)``."""
    k = _check_k(k)
    m = np.broadcast_to(np.eye(2, dtype=complex), k.shape + (2, 2)).copy()
    for f in _spike_factors(barriers, k):
        m = m @ f
    return m


def transfer_matrix(barriers: BarrierArray, k: float) -> np.ndarray:
    """Ordered product of the spike factors; identity for an empty array."""
    return transfer_matrices(barriers, float(k))


def _back_substitute(factors, right):
    """Coefficients in every region, right to left, shape ``(*k.shape, n + 1, 2)``."""
    n = factors.shape[0]
    coeffs = np.empty(right.shape[:-1] + (n + 1, 2), dtype=complex)
    coeffs[..., n, :] = right
    cur = right
    for i in range(n - 1, -1, -1):
        cur = np.einsum("...ij,...j->...i", factors[i], cur)
        coeffs[..., i, :] = cur
    return coeffs


def _forward_substitute(factors, left):
    """Coefficients in every region, left to right, from the leftmost pair."""
    n = factors.shape[0]
    coeffs = np.empty(left.shape[:-1] + (n + 1, 2), dtype=complex)
    coeffs[..., 0, :] = left
    cur = left
    for i in range(n):
        cur = np.einsum("...ij,...j->...i", np.linalg.inv(factors[i]), cur)
        coeffs[..., i + 1, :] = cur
    return coeffs


def _compose(factors, k):
    """Scattering amplitudes ``(t, r, r', t')`` of the whole array by star products.

    Multiplying transfer factors loses about ``|beta| eps`` per spike once
    the array is opaque; composing scattering matrices keeps every
    intermediate amplitude bounded and conserves flux to round-off.
    """
    t = np.ones(k.shape, dtype=complex)
    r = np.zeros(k.shape, dtype=complex)
    rp = np.zeros(k.shape, dtype=complex)
    tp = np.ones(k.shape, dtype=complex)
    for f in factors:
        m11 = f[..., 0, 0]
        tb = 1 / m11
        rb = f[..., 1, 0] / m11
        rpb = -f[..., 0, 1] / m11
        tpb = (m11 * f[..., 1, 1] - f[..., 0, 1] * f[..., 1, 0]) / m11
        denom = 1 - rp * rb
        if np.any(np.abs(denom) <= np.finfo(float).eps):
            raise SingularityError("multiple-reflection denominator vanishes")
        t, r, rp, tp = (
            t * tb / denom,
            r + t * rb * tp / denom,
            rpb + tb * rp * tpb / denom,
            tp * tpb / denom,
        )
    bad = ~(np.isfinite(t) & np.isfinite(r) & np.isfinite(rp) & (t != 0))
    if np.any(bad):
        raise SingularityError(f"M11 vanishes at k = {np.atleast_1d(k)[np.atleast_1d(bad)]}")
    return t, r, rp, tp


def region_coefficients(barriers: BarrierArray, k, outgoing=False):
    """Region coefficients for a batch of wavenumbers.

    With ``outgoing=False`` this is the usual left-incident state (``C = t``,
    ``D = 0``, ``A = 1``).  With ``outgoing=True`` it is the state that
    leaves purely to the right with unit amplitude (``C = 1``, ``B = 0``),
    i.e. the time reverse of right incidence.  The post-selected state of a
    transmitted particle is built from the latter.

    Returns ``(t, r, coeffs)`` for incoming states and ``(a_left, d_right, coeffs)``
    for outgoing ones.
    """
    k = _check_k(k)
    factors = _spike_factors(barriers, k)
    with np.errstate(all="ignore"):
        t, r, rp, _ = _compose(factors, k)
    if not outgoing:
        right = np.stack([t, np.zeros_like(t)], axis=-1)
        return t, r, _back_substitute(factors, right)
    # Time reversal of right incidence (real potential, real k): A = conj(t),
    # D = conj(r').  Substituting from the left avoids the cancellation in
    # M11 + M12 d, which loses all digits for opaque arrays.
    a = np.conj(t)
    left = np.stack([a, np.zeros_like(a)], axis=-1)
    return a, np.conj(rp), _forward_substitute(factors, left)


def scattering_amplitudes(barriers: BarrierArray, k):
    """``(t, r)`` arrays for a batch of wavenumbers."""
    k = _check_k(k)
    with np.errstate(all="ignore"):
        t, r, _, _ = _compose(_spike_factors(barriers, k), k)
    return t, r


def transmission_exact(barriers: BarrierArray, k: float) -> ScatteringResult:
    """Exact left-incident amplitudes ``t = 1/M11``, ``r = M21/M11``."""
    t, r, coeffs = region_coefficients(barriers, float(k))
    return ScatteringResult(float(k), complex(t), complex(r), coeffs, barriers)


def _region_index(barriers, x):
    return np.searchsorted(np.asarray(barriers.positions), x, side="right")


def evaluate_eigenfunctions(barriers: BarrierArray, k, coeffs, x) -> np.ndarray:
    """``psi_k(x)`` for every (k, x) pair, shape ``(len(k), len(x))``.

    ``coeffs`` has shape ``(len(k), n + 1, 2)`` as returned by
    :func:`region_coefficients`.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = _region_index(barriers, x)
    q = barriers.region_wavenumbers(k)[:, j]
    phase = np.exp(1j * q * x)
    return coeffs[:, j, 0] * phase + coeffs[:, j, 1] / phase


def transmission_low_energy(barriers: BarrierArray, k: float, resonance_tol: float = RESONANCE_TOL):
    """Opaque-spike approximation to ``t``, dropping the identity in every factor.

        t ~ prod(1/beta_i) / (-2i)^(n-1) * exp(-ikL_n) / prod sin(k (L_i - L_{i-1}))

    Valid when every ``|beta_i|`` is large compared with ``n``; a
    :class:`LowEnergyWarning` is issued when ``min |beta| < 10 n``.
    """
    k = float(_check_k(k))
    if barriers.n == 0:
        raise DomainError("the low-energy formula needs at least one spike")
    if barriers.inner_potential != 0.0:
        raise ValidationError("the low-energy formula is defined for V0 = 0 only")
    beta = barriers.beta(k)
    n = barriers.n
    if np.min(np.abs(beta)) < 10 * n:
        warnings.warn(
            f"min|beta| = {np.min(np.abs(beta)):.3g} < 10 n = {10 * n}; "
            "low-energy formula is outside its regime",
            LowEnergyWarning,
            stacklevel=2,
        )
    s = np.sin(k * barriers.gaps)
    if np.any(np.abs(s) <= resonance_tol):
        raise ResonanceError(f"sin(k * gap) vanishes at k = {k} (gaps {barriers.gaps})")
    return complex(
        np.prod(1 / beta) / (-2j) ** (n - 1) * np.exp(-1j * k * barriers.span) / np.prod(s)
    )


def packet_coefficient(barriers: BarrierArray, k: float) -> complex:
    """``C(k)`` defined by ``t(k) = (-ik) C(k) exp(-ik L_n)``, from the exact amplitude."""
    k = float(_check_k(k))
    t, _ = scattering_amplitudes(barriers, k)
    return complex(t * np.exp(1j * k * barriers.span) / (-1j * k))


def packet_coefficient_low_energy(n, length, strength, k, mass=1.0, hbar=1.0) -> complex:
    """Low-energy ``C(k)`` for ``n`` equal spikes with gap ``length/(n-1)``."""
    k = float(_check_k(k))
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    inv_beta = -1j * hbar**2 * k / (mass * strength)
    s = np.sin(k * length / (n - 1))
    return complex(inv_beta**n / ((-1j * k) * ((-2j) * s) ** (n - 1)))


def packet_coefficient_series(n, length, strength, k, mass=1.0, hbar=1.0) -> float:
    """Small-k expansion of the low-energy ``C(k)`` to second order in ``k``.

        C ~ (hbar^2/(m alpha)) ((n-1) hbar^2 / (2 L m alpha))^(n-1) (1 + (kL/sqrt(n-1))^2 / 6)
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    a = hbar**2 / (mass * strength)
    lead = a * ((n - 1) * a / (2 * length)) ** (n - 1)
    return lead * (1 + (k * length / np.sqrt(n - 1)) ** 2 / 6)


def max_bandwidth(n: int, length: float) -> float:
    """Spectral half-width ``sqrt(n-1)/L`` inside which ``C(k)`` is roughly constant."""
    if n < 2:
        raise DomainError(f"bandwidth rule needs n >= 2, got {n}")
    if not length > 0:
        raise DomainError(f"length must be positive, got {length}")
    return float(np.sqrt(n - 1) / length)
