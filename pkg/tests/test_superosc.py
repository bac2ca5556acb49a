import numpy as np
import pytest

from deltatunnel.errors import (
    DivergenceError,
    DomainError,
    InstabilityError,
    ResonanceError,
    ValidationError,
)
from deltatunnel.scatter import BarrierArray, transmission_exact
from deltatunnel.superosc import (
    FabryPerotSpec,
    SuperoscSpec,
    band_and_growth,
    bracket,
    f_eval,
    fabry_perot_sum,
    local_wavenumber,
    local_wavenumber_exact,
)


class TestSuperoscillation:
    def test_unit_at_origin(self):
        assert f_eval(SuperoscSpec(7, 3.0, 1.0), 0.0) == pytest.approx(1.0)

    def test_peak_growth(self):
        spec = SuperoscSpec(4, 2.0, 1.0)
        assert band_and_growth(spec).growth_ceiling == pytest.approx(16.0)
        # |bracket| = L / x0 where theta = pi / 2.
        assert abs(f_eval(spec, 4 * np.pi / 2)) == pytest.approx(16.0)

    def test_band(self):
        assert SuperoscSpec(16, 5.0, 3.0).band == pytest.approx(1.0)

    def test_count(self):
        assert band_and_growth(SuperoscSpec(25, 5.0, 3.0)).count_estimate == pytest.approx(5.0)

    def test_no_band_when_not_superoscillatory(self):
        spec = SuperoscSpec(4, 1.0, 1.0)
        assert not spec.superoscillatory
        with pytest.raises(DomainError):
            spec.band

    @pytest.mark.parametrize("kwargs", [dict(N=0, L=2, x0=1), dict(N=2.5, L=2, x0=1), dict(N=3, L=2, x0=0)])
    def test_rejects(self, kwargs):
        with pytest.raises(ValidationError):
            SuperoscSpec(**kwargs)

    def test_local_wavenumber_at_origin(self):
        spec = SuperoscSpec(30, 4.0, 1.0)
        assert local_wavenumber(spec, 0.0, 1e-4) == pytest.approx(-4.0, rel=1e-7)

    def test_local_wavenumber_inside_band(self):
        spec = SuperoscSpec(20, 5.0, 3.0)
        k = 0.2 * spec.band
        assert local_wavenumber(spec, k, 1e-4) == pytest.approx(-5.0, rel=0.02)
        assert local_wavenumber(spec, k, 1e-4) == pytest.approx(local_wavenumber_exact(spec, k), rel=1e-7)

    def test_local_wavenumber_far_outside_band_bounded_by_x0(self):
        spec = SuperoscSpec(20, 5.0, 3.0)
        # At theta = pi / 2 the local rate drops to -x0^2 / L.
        k = spec.N * np.pi / (2 * spec.x0)
        assert k > 5 * spec.band
        assert abs(local_wavenumber(spec, k, 1e-4)) == pytest.approx(9 / 5, rel=1e-6)

    def test_conjugate_symmetry(self):
        spec = SuperoscSpec(9, 3.0, 1.5)
        k = np.linspace(0.1, 6, 17)
        assert np.allclose(f_eval(spec, -k), np.conj(f_eval(spec, k)), rtol=1e-14)

    def test_branch_tracking_matches_power(self):
        spec = SuperoscSpec(40, 3.0, 1.0)
        k = np.linspace(-5, 5, 2001)
        assert np.allclose(f_eval(spec, k, track_branch=True), f_eval(spec, k), rtol=1e-9)

    def test_branch_fallback_on_zero(self):
        # L = 0 turns the bracket into cos(theta), which vanishes at k = N pi / (2 x0).
        spec = SuperoscSpec(2, 0.0, 1.0)
        k = np.array([0.0, np.pi])
        with pytest.warns(UserWarning):
            values = f_eval(spec, k, track_branch=True)
        assert values[1] == pytest.approx(0.0, abs=1e-15)
        with pytest.raises(InstabilityError):
            local_wavenumber(spec, np.pi, 1e-9)


class TestFabryPerot:
    def test_single_term(self):
        sums = fabry_perot_sum(FabryPerotSpec(2j, 1.0, 1.0, terms=1))
        assert sums.partial == 1
        assert sums.exact_partial == pytest.approx(1 / (1 + 2j) ** 2)
        assert sums.ratio == pytest.approx(0.8)

    def test_long_series_converges_to_closed(self):
        sums = fabry_perot_sum(FabryPerotSpec(2j, 1.0, 1.0, terms=200))
        assert sums.exact_partial == pytest.approx(sums.exact_closed, rel=1e-15, abs=1e-15)

    def test_formal_closed_form(self):
        k, L = 0.7, 1.3
        sums = fabry_perot_sum(FabryPerotSpec(1j, k, L))
        assert sums.closed_form * (1 - np.exp(2j * k * L)) == pytest.approx(1.0)

    def test_exact_closed_is_two_spike_transmission(self):
        for k in (0.3, 1.1, 2.9):
            spec = FabryPerotSpec.from_strength(1.0, k, 1.0)
            t = transmission_exact(BarrierArray([0.0, 1.0], [1.0, 1.0]), k).t
            assert fabry_perot_sum(spec).exact_closed == pytest.approx(t, rel=1e-13)

    def test_resonance(self):
        with pytest.raises(ResonanceError):
            fabry_perot_sum(FabryPerotSpec(1j, np.pi, 1.0))

    def test_divergent_ratio(self):
        # Non-physical beta with |beta / (1 + beta)| > 1.
        with pytest.raises(DivergenceError):
            fabry_perot_sum(FabryPerotSpec(-0.6, 1.0, 1.0))

    def test_invalid(self):
        with pytest.raises(ValidationError):
            FabryPerotSpec(1j, 1.0, 1.0, terms=0)
        with pytest.raises(DomainError):
            FabryPerotSpec(0j, 1.0, 1.0)
