import numpy as np
import pytest

from deltatunnel.delays import (
    delay_report,
    dwell_time,
    free_time,
    group_delay,
    near_resonance,
    traversal_time,
)
from deltatunnel.errors import DomainError, StencilError
from deltatunnel.scatter import BarrierArray

TUNNEL = BarrierArray.equally_spaced(2, 1.0, 1000.0)


def test_free_group_delay_vanishes():
    assert group_delay(BarrierArray(), 0.5) == 0.0
    transparent = BarrierArray.equally_spaced(3, 2.0, 0.0)
    assert group_delay(transparent, 0.5) == pytest.approx(0.0, abs=1e-9)
    assert traversal_time(transparent, 0.5) == pytest.approx(free_time(transparent, 0.5))


def test_tunnelling_group_delay_cancels_crossing_time():
    tau = group_delay(TUNNEL, 0.1)
    assert tau == pytest.approx(-10.0, rel=0.02)
    # Frozen value from a Richardson-checked run.
    assert tau == pytest.approx(-9.990004944, rel=1e-7)


def test_three_spikes_deep_regime():
    b = BarrierArray.equally_spaced(3, 1.0, 500.0)
    k = 0.05
    assert abs(b.beta(k)[0]) == pytest.approx(1e4)
    assert abs(traversal_time(b, k)) <= 1e-2 * free_time(b, k)


def test_traversal_decreases_with_strength():
    values = [traversal_time(BarrierArray.equally_spaced(2, 1.0, a), 0.1) for a in (10, 100, 1000, 1e4)]
    assert all(a > b > 0 for a, b in zip(values, values[1:]))
    # Roughly ~ 1/alpha once deep.
    assert values[2] / values[3] == pytest.approx(10, rel=0.01)


def test_single_delta_group_delay_closed_form():
    # t = 1/(1 + i b/k): arg t = -atan(b/k), d/dk = b/(k^2 + b^2).
    b_val, k = 2.0, 1.3
    b = BarrierArray([0.0], [b_val])
    expected = (1 / k) * b_val / (k**2 + b_val**2)
    assert group_delay(b, k) == pytest.approx(expected, rel=1e-8)


def test_dwell_free_equals_crossing_time():
    b = BarrierArray.equally_spaced(2, 1.0, 0.0)
    for k in (0.3, 1.0, 2.5):
        assert dwell_time(b, k) == pytest.approx(1.0 / k, rel=1e-7)


def test_dwell_tunnelling_is_negligible():
    assert abs(dwell_time(TUNNEL, 0.1)) <= 1e-5 * free_time(TUNNEL, 0.1)


def test_dwell_step_validation():
    with pytest.raises(DomainError):
        dwell_time(TUNNEL, 0.1, dv=0.0)
    with pytest.raises(DomainError):
        dwell_time(BarrierArray([0.0], [1.0]), 0.1)


def test_dwell_evanescent_branch_requires_opt_in():
    b = BarrierArray.equally_spaced(2, 1.0, 1.0)
    k = 0.1
    with pytest.raises(DomainError):
        dwell_time(b, k, dv=0.01)
    assert np.isfinite(dwell_time(b, k, dv=0.01, allow_evanescent=True))


def test_richardson_consistency():
    r = delay_report(TUNNEL, 0.1)
    coarse = group_delay(TUNNEL, 0.1, dk=4e-6)
    assert abs(coarse - r.group_delay) <= 10 * r.group_delay_error + 1e-9
    assert r.traversal_time == pytest.approx(r.group_delay + r.free_time)
    assert r.step_sizes[0] == pytest.approx(1e-6)


def test_step_validation():
    with pytest.raises(DomainError):
        group_delay(TUNNEL, 0.1, dk=0.2)
    with pytest.raises(DomainError):
        group_delay(TUNNEL, -0.1)


def test_stencil_straddling_phase_jump():
    # A narrow resonance makes arg t sweep nearly pi over a coarse stencil.
    b = BarrierArray.equally_spaced(2, 1.0, 1000.0)
    with pytest.raises(StencilError):
        group_delay(b, np.pi, dk=1e-2)


def test_near_resonance():
    assert near_resonance(TUNNEL, np.pi + 1e-8)
    assert not near_resonance(TUNNEL, 3.0)
    assert not near_resonance(BarrierArray([0.0], [1.0]), np.pi)
