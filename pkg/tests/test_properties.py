import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from deltatunnel.scatter import BarrierArray, transfer_matrix, transmission_exact
from deltatunnel.superosc import SuperoscSpec, f_eval
from deltatunnel.weakval import WeakValueProblem, construct_states, two_level_problem, weak_value

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def barrier_arrays(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    gaps = draw(st.lists(st.floats(0.05, 3.0, **finite), min_size=n - 1, max_size=n - 1))
    strengths = draw(st.lists(st.floats(-50.0, 50.0, **finite), min_size=n, max_size=n))
    positions = np.concatenate([[0.0], np.cumsum(gaps)])
    return BarrierArray(positions, strengths)


wavenumbers = st.floats(0.01, 20.0, **finite)
complexes = st.complex_numbers(max_magnitude=1e4, allow_nan=False, allow_infinity=False)
phases = st.floats(0.0, 2 * np.pi, **finite)


@given(barrier_arrays(), wavenumbers)
def test_unit_determinant(b, k):
    m = transfer_matrix(b, k)
    assert abs(np.linalg.det(m) - 1) <= 1e-10 * max(1.0, np.linalg.norm(m) ** 2)


@given(barrier_arrays(), wavenumbers)
def test_flux_conservation(b, k):
    res = transmission_exact(b, k)
    assert res.transmission + res.reflection == pytest.approx(1.0, abs=1e-10)


@given(barrier_arrays(max_n=4), wavenumbers)
def test_derivative_jump(b, k):
    res = transmission_exact(b, k)
    for i, (x, alpha) in enumerate(zip(b.positions, b.strengths)):
        psi = res.wavefunction(np.array([x]))[0]
        jump = res.derivative(x, region=i + 1)[0] - res.derivative(x, region=i)[0]
        scale = max(1.0, abs(res.derivative(x, region=i)[0]), 2 * abs(alpha * psi))
        assert abs(jump - 2 * alpha * psi) <= 1e-9 * scale


@given(barrier_arrays(max_n=3), wavenumbers)
def test_mirror_image_transmits_equally(b, k):
    # Reversing the array leaves t unchanged (reciprocity for real potentials).
    span = b.span
    mirrored = BarrierArray(
        span - np.asarray(b.positions)[::-1], np.asarray(b.strengths)[::-1]
    )
    assert transmission_exact(mirrored, k).t == pytest.approx(transmission_exact(b, k).t, rel=1e-9, abs=1e-12)


@given(st.integers(1, 40), st.floats(0.5, 5.0, **finite), st.floats(0.1, 3.0, **finite), st.floats(0.0, 10.0, **finite))
def test_superosc_conjugate_symmetry(n, L, x0, k):
    spec = SuperoscSpec(n, L, x0)
    assert f_eval(spec, -k) == pytest.approx(np.conj(f_eval(spec, k)), rel=1e-12, abs=1e-300)


@st.composite
def unit_vectors(draw, dim):
    re = draw(st.lists(st.floats(-1, 1, **finite), min_size=dim, max_size=dim))
    im = draw(st.lists(st.floats(-1, 1, **finite), min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    norm = np.linalg.norm(v)
    assume(norm > 1e-3)
    return v / norm


@given(unit_vectors(3), unit_vectors(3), phases, phases)
def test_weak_value_phase_invariance(pre, post, a, b):
    op = np.diag([0.5, -1.0, 2.0]).astype(complex)
    assume(abs(np.vdot(post, pre)) > 1e-3)
    base = weak_value(WeakValueProblem(pre, post, op))
    turned = weak_value(WeakValueProblem(np.exp(1j * a) * pre, np.exp(1j * b) * post, op))
    assert turned == pytest.approx(base, rel=1e-9, abs=1e-9)


@given(unit_vectors(3))
def test_self_post_selection_is_expectation(psi):
    op = np.array([[1, 1j, 0], [-1j, 2, 0.5], [0, 0.5, -1]], dtype=complex)
    assert weak_value(WeakValueProblem(psi, psi, op)) == pytest.approx(np.vdot(psi, op @ psi))


@settings(max_examples=200)
@given(complexes)
def test_construct_states_round_trip(z):
    a1, a2 = -1.0, 2.0
    assume(abs(z - a2) > 1e-6)
    got = weak_value(two_level_problem(construct_states(z, a1, a2), a1, a2))
    assert abs(got - z) < 1e-12 * max(1.0, abs(z))
