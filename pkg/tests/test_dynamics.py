import math

import numpy as np
import pytest

from conftest import excite_first, excite_first_rho
from wcavity.analytic import coefficients_series, generation_times, target_state
from wcavity.dynamics import (
    IntegratorConfig,
    evolve_effective,
    evolve_fock,
    evolve_full,
    evolve_lindblad,
    evolve_schrodinger,
    fidelity,
    jump_operators,
    lindblad_rhs,
    liouvillian,
    decay_rates,
    reduce_to_atoms,
)
from wcavity.hamiltonian import build_full_static, interaction_picture_builder
from wcavity.model import IntegratorError, SystemParams, atomic_state, density


def decoupled_hamiltonian(p):
    """Static Hamiltonian with the atom-cavity coupling switched off."""
    h = np.array(build_full_static(p).matrix)
    n = p.n_atoms
    for l in range(1, n + 1):
        h[l, n + l] = h[n + l, l] = 0
    return h


class TestSchrodinger:
    def test_resonant_rabi(self):
        p = SystemParams(3, nu=0.0, delta=0.0)
        res = evolve_full(p, excite_first(3), 10.0, IntegratorConfig(max_samples=400))
        np.testing.assert_allclose(res.populations[:, 1], np.cos(res.t) ** 2, atol=1e-6)

    def test_decoupled_atoms_stationary(self, p4):
        res = evolve_schrodinger(decoupled_hamiltonian(p4), excite_first(4), 30.0, params=p4)
        assert np.max(np.abs(res.populations - res.populations[0])) <= 1e-10

    def test_w_state_n4(self, p4):
        t = generation_times(p4)[0]
        res = evolve_full(p4, excite_first(4), t)
        assert res.fidelity[-1] >= 0.98

    def test_norm_and_energy(self, p4):
        h = build_full_static(p4).matrix
        res = evolve_full(p4, excite_first(4), 50.0, IntegratorConfig(keep_states=True, max_samples=200))
        assert np.max(np.abs(res.trace - 1)) <= 1e-9
        energies = [np.real(np.vdot(s, h @ s)) for s in res.states]
        assert np.ptp(energies) <= 1e-8
        excitations = 1 - res.populations[:, 0]
        assert np.max(np.abs(excitations - 1)) <= 1e-10

    def test_frame_equivalence(self, p4):
        cfg = IntegratorConfig(max_samples=50)
        a = evolve_full(p4, excite_first(4), 5.0, cfg, frame="static")
        b = evolve_full(p4, excite_first(4), 5.0, cfg, frame="interaction")
        np.testing.assert_allclose(a.t, b.t)
        np.testing.assert_allclose(a.populations, b.populations, atol=1e-7)
        np.testing.assert_allclose(a.fidelity, b.fidelity, atol=1e-7)

    def test_step_halving(self, p4):
        t = generation_times(p4)[0]
        coarse = evolve_full(p4, excite_first(4), t, IntegratorConfig(max_samples=1))
        fine = evolve_full(p4, excite_first(4), t, IntegratorConfig(courant=0.0025, max_samples=1))
        assert abs(coarse.fidelity[-1] - fine.fidelity[-1]) <= 1e-8

    def test_power_and_step_modes_agree(self):
        p = SystemParams(3, nu=4.0, delta=6.0)
        a = evolve_full(p, excite_first(3), 3.0, IntegratorConfig(mode="power", max_samples=10))
        b = evolve_full(p, excite_first(3), 3.0, IntegratorConfig(mode="step", max_samples=10))
        np.testing.assert_allclose(a.final_state, b.final_state, atol=1e-12)

    @pytest.mark.parametrize("n_max", [1, 2])
    def test_fock_cross_check(self, n_max):
        p = SystemParams(3, nu=10, delta=10)
        t = generation_times(p)[0]
        cfg = IntegratorConfig(max_samples=100)
        fock = evolve_fock(p, n_max, t, cfg)
        sector = evolve_full(p, excite_first(3), t, cfg)
        np.testing.assert_allclose(fock.fidelity, sector.fidelity, atol=1e-10)
        assert fock.metadata["max_sector_leakage"] <= 1e-12

    def test_abort_on_large_step(self, p4):
        with pytest.raises(IntegratorError, match="norm drift"):
            evolve_full(p4, excite_first(4), 10.0, IntegratorConfig(dt=0.5))

    def test_rejects_unnormalised(self, p4):
        with pytest.raises(ValueError):
            evolve_full(p4, 2 * excite_first(4), 1.0)


class TestEffective:
    def test_matches_closed_form(self, p4):
        t = 4 * generation_times(p4)[0]
        res = evolve_effective(p4, [1, 0, 0, 0], t, IntegratorConfig(keep_states=True, max_samples=100))
        exact = coefficients_series(p4, res.t)
        assert np.max(np.abs(np.array(res.states) - exact)) <= 1e-8

    def test_equal_populations_at_generation_time(self, p4):
        res = evolve_effective(p4, [1, 0, 0, 0], generation_times(p4)[0])
        np.testing.assert_allclose(res.populations[-1, 1:5], 0.25, atol=1e-9)
        assert res.fidelity[-1] == pytest.approx(1, abs=1e-9)

    def test_symmetric_state_stationary(self, p4):
        res = evolve_effective(p4, np.full(4, 0.5), 100.0)
        np.testing.assert_allclose(res.populations[:, 1:5], 0.25, atol=1e-12)

    def test_random_state_norm(self, p4):
        rng = np.random.default_rng(7)
        c0 = rng.normal(size=4) + 1j * rng.normal(size=4)
        res = evolve_effective(p4, c0 / np.linalg.norm(c0), 200.0)
        assert np.max(np.abs(res.trace - 1)) <= 1e-12


class TestLindblad:
    def test_amplitude_damping(self):
        p = SystemParams(4, nu=0.0, delta=0.0, gamma_atom=0.2)
        res = evolve_lindblad(p, excite_first_rho(4), 15.0, IntegratorConfig(max_samples=100), h=np.zeros((10, 10)))
        res_states = evolve_lindblad(
            p, excite_first_rho(4), 15.0, IntegratorConfig(max_samples=100, keep_states=True), h=np.zeros((10, 10))
        )
        survival = [fidelity(reduce_to_atoms(r), [1, 0, 0, 0]) for r in res_states.states]
        np.testing.assert_allclose(survival, np.exp(-0.2 * res.t), atol=1e-8)
        np.testing.assert_allclose(res.populations[:, 0], 1 - np.exp(-0.2 * res.t), atol=1e-8)

    def test_unitary_limit(self, p4):
        t = generation_times(p4)[0]
        cfg = IntegratorConfig(max_samples=200)
        a = evolve_lindblad(p4, excite_first_rho(4), t, cfg)
        b = evolve_full(p4, excite_first(4), t, cfg)
        np.testing.assert_allclose(a.fidelity, b.fidelity, atol=1e-7)

    def test_cavity_decay_endpoint(self):
        p = SystemParams(4, nu=10, delta=10, gamma_cavity=0.3)
        res = evolve_lindblad(p, excite_first_rho(4), generation_times(p)[0])
        assert res.fidelity[-1] == pytest.approx(0.93, abs=0.03)

    def test_invariants_every_sample(self):
        p = SystemParams(4, nu=10, delta=10, gamma_atom=0.05, gamma_cavity=0.3, kappa=0.2)
        res = evolve_lindblad(p, excite_first_rho(4), 40.0, IntegratorConfig(keep_states=True, max_samples=300))
        for rho in res.states:
            assert np.max(np.abs(rho - rho.conj().T)) <= 1e-10
        assert np.max(np.abs(res.trace - 1)) <= 1e-8
        assert res.min_eigenvalue.min() >= -1e-8
        assert np.all(res.purity <= 1 + 1e-10)
        excitations = 1 - res.populations[:, 0]
        assert np.all(np.diff(excitations) <= 1e-12)

    def test_prebuilt_liouvillian_matches_matrix_form(self):
        p = SystemParams(3, nu=6.0, delta=8.0, gamma_atom=0.1, gamma_cavity=0.4, kappa=0.3)
        h = build_full_static(p).matrix
        rng = np.random.default_rng(3)
        x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = x @ x.conj().T
        rho /= np.trace(rho)
        direct = lindblad_rhs(h, rho, decay_rates(p))
        via_super = (liouvillian(h, jump_operators(p)) @ rho.reshape(-1)).reshape(8, 8)
        np.testing.assert_allclose(direct, via_super, atol=1e-13)
        cfg_p = IntegratorConfig(mode="power", max_samples=5)
        cfg_s = IntegratorConfig(mode="step", max_samples=5)
        a = evolve_lindblad(p, excite_first_rho(3), 4.0, cfg_p)
        b = evolve_lindblad(p, excite_first_rho(3), 4.0, cfg_s)
        np.testing.assert_allclose(a.final_state, b.final_state, atol=1e-12)

    def test_interaction_frame_with_decay(self):
        p = SystemParams(3, nu=10, delta=10, gamma_atom=0.05, gamma_cavity=0.2)
        cfg = IntegratorConfig(max_samples=20)
        a = evolve_lindblad(p, excite_first_rho(3), 3.0, cfg)
        b = evolve_lindblad(p, excite_first_rho(3), 3.0, cfg, h=interaction_picture_builder(p))
        np.testing.assert_allclose(a.fidelity, b.fidelity, atol=1e-7)

    def test_abort_on_large_step(self, p4):
        with pytest.raises(IntegratorError):
            evolve_lindblad(p4, excite_first_rho(4), 10.0, IntegratorConfig(dt=0.5))

    def test_shape_check(self, p4):
        with pytest.raises(ValueError):
            evolve_lindblad(p4, np.eye(3), 1.0)


class TestReduction:
    def test_pure_atomic(self):
        amps = target_state(4).amplitudes
        rho = reduce_to_atoms(atomic_state(amps))
        np.testing.assert_allclose(rho[1:, 1:], np.outer(amps, amps), atol=1e-15)
        assert rho[0, 0] == 0

    def test_cavity_photon(self):
        psi = np.zeros(10, complex)
        psi[5] = 1
        rho = reduce_to_atoms(psi)
        expected = np.zeros((5, 5))
        expected[0, 0] = 1
        np.testing.assert_allclose(rho, expected)

    def test_mixed_atom_cavity(self):
        rho_full = 0.5 * density(np.eye(10)[1]) + 0.5 * density(np.eye(10)[5])
        rho = reduce_to_atoms(rho_full)
        expected = np.diag([0.5, 0.5, 0, 0, 0])
        np.testing.assert_allclose(rho, expected)
        assert np.trace(rho) == pytest.approx(1)


class TestFidelity:
    def test_target_itself(self):
        amps = target_state(4).amplitudes
        assert fidelity(reduce_to_atoms(atomic_state(amps)), target_state(4)) == pytest.approx(1)

    def test_orthogonal(self):
        assert fidelity(reduce_to_atoms(np.eye(10)[5]), target_state(4)) == 0

    def test_maximally_mixed(self):
        rho = np.diag([0, 0.25, 0.25, 0.25, 0.25])
        assert fidelity(rho, target_state(4)) == pytest.approx(0.25)

    def test_pure_vector(self):
        phi = np.array([1, 0, 0, 0], complex)
        assert fidelity(phi, target_state(4)) == pytest.approx(0.25)


class TestRunResultOutput:
    def test_csv_columns(self, p4):
        res = evolve_full(p4, excite_first(4), 1.0, IntegratorConfig(max_samples=5))
        header = res.to_csv().splitlines()[0].split(",")
        assert header[:3] == ["t_f", "tau", "fidelity"]
        assert header[-4:] == ["pop_fiber", "pop_vacuum", "trace", "purity"]
        assert len(header) == 3 + 2 * 4 + 4

    def test_absolute_time_column(self):
        p = SystemParams(4, nu=10, delta=10, f_absolute_mhz=2 * math.pi * 750)
        res = evolve_full(p, excite_first(4), 1.0, IntegratorConfig(max_samples=2))
        header = res.to_csv().splitlines()[0].split(",")
        assert header[2] == "t_ns"
        assert res.t_ns[-1] == pytest.approx(1e3 / (2 * math.pi * 750))

    def test_json(self, p4):
        import json

        res = evolve_full(p4, excite_first(4), 1.0, IntegratorConfig(max_samples=5))
        doc = json.loads(res.to_json())
        assert doc["metadata"]["model"] == "full"
        assert len(doc["data"]) == len(res.t)
