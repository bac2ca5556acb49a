"""Group delay, traversal time and stationary dwell time from phase derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import central_phase_derivative, richardson
from .errors import DomainError
from .scatter import BarrierArray, scattering_amplitudes

__all__ = [
    "DelayReport",
    "group_delay",
    "traversal_time",
    "dwell_time",
    "delay_report",
    "free_time",
    "near_resonance",
]

DK_REL = 1e-5
DV_REL = 1e-6


@dataclass(frozen=True)
class DelayReport:
    k: float
    group_delay: float
    free_time: float
    traversal_time: float
    dwell_time: float
    group_delay_error: float
    dwell_error: float
    step_sizes: tuple[float, float]


def free_time(barriers: BarrierArray, k: float) -> float:
    """Time ``L_n m / (hbar k)`` a free particle needs to cross the array."""
    return float(barriers.span * barriers.mass / (barriers.hbar * k))


def near_resonance(barriers: BarrierArray, k: float, tol: float = 1e-6) -> bool:
    """True when ``k`` is within ``tol`` of a zero of ``sin(k * gap)`` for some gap."""
    gaps = barriers.gaps
    if gaps.size == 0:
        return False
    m = np.round(k * gaps / np.pi)
    return bool(np.any((m > 0) & (np.abs(k - m * np.pi / gaps) < tol)))


def _arg_t_of_k(barriers):
    return lambda ks: np.angle(scattering_amplitudes(barriers, ks)[0])


def _arg_t_of_v0(barriers, k):
    def phases(vs):
        return np.array(
            [np.angle(scattering_amplitudes(barriers.with_inner_potential(v), k)[0]) for v in vs]
        )

    return phases


def _group_delay(barriers, k, dk):
    if not (np.isfinite(k) and k > 0):
        raise DomainError(f"k must be positive, got {k}")
    if dk is None:
        dk = DK_REL * k
    if not 0 < dk < k:
        raise DomainError(f"need 0 < dk < k, got dk = {dk}, k = {k}")
    scale = barriers.mass / (barriers.hbar * k)
    phase = _arg_t_of_k(barriers)
    value, err = richardson(
        lambda h: scale * central_phase_derivative(phase, k, h),
        dk,
        floor=scale * 8 * np.finfo(float).eps * np.pi / dk,
    )
    return float(value), float(err), float(dk)


def group_delay(barriers: BarrierArray, k: float, dk: float | None = None) -> float:
    """``tau_g = hbar d arg(t)/dE = (m / hbar k) d arg(t)/dk`` by central differences.

    ``dk`` defaults to ``1e-5 k``.  Raises :class:`StencilError` when ``t``'s
    phase jumps inside the stencil.
    """
    return _group_delay(barriers, k, dk)[0]


def traversal_time(barriers: BarrierArray, k: float, dk: float | None = None) -> float:
    """Group delay plus the free crossing time ``L_n / v``; zero means instantaneous crossing."""
    return group_delay(barriers, k, dk) + free_time(barriers, k)


def _dwell_time(barriers, k, dv, allow_evanescent):
    if not (np.isfinite(k) and k > 0):
        raise DomainError(f"k must be positive, got {k}")
    if barriers.n < 2:
        raise DomainError("dwell time needs at least two spikes to define the inner region")
    energy = float(barriers.energy(k))
    if dv is None:
        dv = DV_REL * energy
    if not (np.isfinite(dv) and dv > 0):
        raise DomainError(f"dV must be positive, got {dv}")
    v0 = barriers.inner_potential
    if not allow_evanescent and energy - (v0 + dv) <= 0:
        raise DomainError(
            f"E - V0 - dV = {energy - v0 - dv:.3g} <= 0; pass allow_evanescent=True to "
            "differentiate on the evanescent branch"
        )
    phase = _arg_t_of_v0(barriers, k)
    value, err = richardson(
        lambda h: -barriers.hbar * central_phase_derivative(phase, v0, h),
        dv,
        floor=barriers.hbar * 8 * np.finfo(float).eps * np.pi / dv,
    )
    return float(value), float(err), float(dv)


def dwell_time(
    barriers: BarrierArray, k: float, dv: float | None = None, allow_evanescent: bool = False
) -> float:
    """Conditional dwell time ``-hbar d arg(t)/dV0`` for a constant potential between the spikes.

    The sign makes the free-particle value ``+L/v``.  ``dv`` defaults to
    ``1e-6 E``; the derivative is taken around ``barriers.inner_potential``.
    """
    return _dwell_time(barriers, k, dv, allow_evanescent)[0]


def delay_report(
    barriers: BarrierArray, k: float, dk: float | None = None, dv: float | None = None
) -> DelayReport:
    tau_g, tau_err, dk = _group_delay(barriers, k, dk)
    t_free = free_time(barriers, k)
    if barriers.n >= 2:
        dwell, dwell_err, dv = _dwell_time(barriers, k, dv, False)
    else:
        dwell, dwell_err, dv = 0.0, 0.0, 0.0
    return DelayReport(
        k=float(k),
        group_delay=tau_g,
        free_time=t_free,
        traversal_time=tau_g + t_free,
        dwell_time=dwell,
        group_delay_error=tau_err,
        dwell_error=dwell_err,
        step_sizes=(dk, dv),
    )
