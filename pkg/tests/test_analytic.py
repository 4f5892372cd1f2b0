import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcavity.analytic import (
    analytic_fidelity,
    coefficient_ode_rhs,
    coefficients,
    coefficients_series,
    effective_couplings,
    generation_times,
    target_state,
)
from wcavity.dynamics import rk4_step
from wcavity.hamiltonian import effective_from_sum
from wcavity.model import ParameterError, SingularityError, SystemParams

dispersive = st.builds(
    lambda n, delta, ratio: SystemParams(n, nu=delta / ratio, delta=delta),
    st.integers(3, 12),
    st.floats(2.0, 40.0),
    st.floats(0.2, 0.95).map(lambda x: x),
).filter(lambda p: p.delta < p.collective_shift * 0.99)


class TestCouplings:
    def test_n4_against_mode_sum(self, p4):
        k = effective_couplings(p4)
        oracle = effective_from_sum(p4).matrix
        assert k.xi == pytest.approx(oracle[0, 0].real, abs=1e-12)
        assert k.eta == pytest.approx(-oracle[0, 1].real, abs=1e-12)
        assert (round(k.xi, 5), round(k.eta, 5)) == (0.06667, 0.03333)

    def test_n3(self):
        k = effective_couplings(SystemParams(3, nu=10, delta=10))
        assert (k.xi, k.eta) == pytest.approx((0.05, 0.05), abs=1e-14)

    def test_pole(self):
        with pytest.raises(SingularityError):
            effective_couplings(SystemParams(4, nu=5, delta=10))


class TestCoefficients:
    def test_initial(self, p4):
        c = coefficients(p4, 0.0).c
        np.testing.assert_allclose(c, [1, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("n", [3, 4, 5, 6, 9])
    def test_generation_time_amplitudes(self, n):
        p = SystemParams(n, nu=10, delta=10)
        c = coefficients(p, generation_times(p)[0]).c
        np.testing.assert_allclose(abs(c[0]), (n - 2) / n, atol=1e-12)
        np.testing.assert_allclose(np.abs(c[1:]), 2 / n, atol=1e-12)
        rel = np.angle(c[1] / c[0])
        assert abs(abs(rel) - math.pi) < 1e-12

    def test_revival(self, p4):
        eta = effective_couplings(p4).eta
        c = coefficients(p4, 2 * math.pi / (4 * eta)).c
        assert abs(c[0]) == pytest.approx(1, abs=1e-12)
        np.testing.assert_allclose(c[1:], 0, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(p=dispersive, t=st.floats(0, 1e3))
    def test_normalised_and_symmetric(self, p, t):
        c = coefficients(p, t).c
        assert abs(np.sum(np.abs(c) ** 2) - 1) <= 1e-12
        assert np.all(c[1:] == c[1])

    @settings(max_examples=30, deadline=None)
    @given(p=dispersive, frac=st.floats(0.01, 0.99))
    def test_w_class_away_from_revivals(self, p, frac):
        eta = effective_couplings(p).eta
        c = coefficients(p, frac * 2 * math.pi / (p.n_atoms * eta)).c
        assert np.all(np.abs(c) > 0)

    @settings(max_examples=20, deadline=None)
    @given(p=dispersive, t=st.floats(0, 200))
    def test_population_period(self, p, t):
        period = 2 * math.pi / (p.n_atoms * effective_couplings(p).eta)
        a = np.abs(coefficients(p, t).c) ** 2
        b = np.abs(coefficients(p, t + period).c) ** 2
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_series_matches_scalar(self, p4):
        times = np.linspace(0, 50, 7)
        series = coefficients_series(p4, times)
        for t, row in zip(times, series):
            np.testing.assert_allclose(row, coefficients(p4, t).c, atol=1e-15)


class TestGenerationTimes:
    def test_n4(self, p4):
        assert generation_times(p4)[0] == pytest.approx(23.56, abs=5e-3)

    def test_n3(self):
        assert generation_times(SystemParams(3, nu=10, delta=10))[0] == pytest.approx(20.94, abs=5e-3)

    def test_linear_in_k(self, p4):
        t = generation_times(p4, 3)
        np.testing.assert_allclose(t / t[0], [1, 3, 5, 7])

    def test_wrong_side_of_pole(self):
        with pytest.raises(ParameterError, match="sqrt"):
            generation_times(SystemParams(4, nu=10, delta=25))

    @pytest.mark.parametrize("n", [3, 4, 7])
    def test_analytic_fidelity_one(self, n):
        p = SystemParams(n, nu=10, delta=10)
        np.testing.assert_allclose(analytic_fidelity(p, generation_times(p, 4)), 1, atol=1e-12)


class TestTarget:
    def test_n4(self):
        np.testing.assert_allclose(target_state(4).amplitudes, [0.5, -0.5, -0.5, -0.5])

    def test_n3(self):
        np.testing.assert_allclose(target_state(3).amplitudes, [1 / 3, -2 / 3, -2 / 3])

    @pytest.mark.parametrize("n", range(3, 40))
    def test_normalised(self, n):
        assert np.sum(target_state(n).amplitudes ** 2) == pytest.approx(1, abs=1e-14)

    def test_small_n(self):
        with pytest.raises(ParameterError):
            target_state(2)


class TestOdeRhs:
    def test_basis_vector(self, p4):
        k = effective_couplings(p4)
        rhs = coefficient_ode_rhs(p4, [1, 0, 0, 0])
        np.testing.assert_allclose(rhs, -1j * np.array([k.xi, -k.eta, -k.eta, -k.eta]))

    def test_symmetric_eigenvector(self, p4):
        k = effective_couplings(p4)
        c = np.full(4, 0.5, complex)
        np.testing.assert_allclose(coefficient_ode_rhs(p4, c), -1j * (k.xi - 3 * k.eta) * c, atol=1e-15)

    def test_rk4_reaches_closed_form(self, p4):
        t_end = generation_times(p4)[0]
        steps = 4000
        dt = t_end / steps
        c = np.array([1, 0, 0, 0], complex)
        rhs = lambda t, x: coefficient_ode_rhs(p4, x)  # noqa: E731
        for i in range(steps):
            c = rk4_step(rhs, i * dt, c, dt)
        assert np.max(np.abs(c - coefficients(p4, t_end).c)) <= 1e-8
