import numpy as np
import scipy.linalg as spl
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp
from pytest import mark, raises
from pointerwork.errors import ConfigError, NumericalError
from pointerwork.hilbert import (
    DensityMatrix,
    StateVector,
    eig_hermitian,
    partial_trace_env,
    rdm_in_basis,
)
from pointerwork.model import Protocol, h_total, h_total_at, with_protocol
from pointerwork.propagate import (
    TimeGrid,
    coherence_norm,
    commutator_norm,
    default_time_grid,
    evolve,
    instantaneous_basis,
    instantaneous_series,
    mix_trajectories,
    rdm_in_instantaneous_basis,
    spectral_radius_bound,
)
from conftest import make_model


def random_state(rng, dim):
    return StateVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


class TestTimeGrid:
    def test_samples_include_end(self):
        grid = TimeGrid(0.0, 2.0, 100, 10)
        assert grid.n_samples == 11
        assert_allclose(grid.sample_times[[0, -1]], [0.0, 2.0])
        assert abs(grid.dt - 0.02) < 1e-15

    def test_stride_must_divide(self):
        with raises(ConfigError):
            TimeGrid(0.0, 1.0, 10, 3)
        with raises(ConfigError):
            TimeGrid(0.0, 1.0, 0, 1)
        with raises(ConfigError):
            TimeGrid(1.0, 0.0, 10, 1)

    def test_refined_keeps_samples(self):
        grid = TimeGrid(0.0, 1.0, 20, 4)
        assert_allclose(grid.refined(2).sample_times, grid.sample_times)

    def test_default_grid_is_stable(self, small_model):
        grid = default_time_grid(small_model, 0.0, 10.0, 50)
        assert grid.dt * spectral_radius_bound(small_model) <= 0.5
        assert grid.n_samples == 51


class TestEvolve:
    def test_eigenstate_is_stationary(self):
        model = make_model(protocol=Protocol.constant(0.1, 5.0))
        psi = eig_hermitian(h_total_at(model, 0.1)).eigenvectors[:, 7]
        traj = evolve(model, psi, TimeGrid(0.0, 5.0, 50, 5))
        for rdm in traj.rdms:
            assert_allclose(np.asarray(rdm), np.asarray(traj.rdms[0]), atol=1e-10)

    def test_decoupled_spectrum_is_constant(self, rng):
        model = make_model(h_is=np.zeros((2, 2)))
        traj = evolve(model, random_state(rng, model.dim), TimeGrid(0.0, 10.0, 200, 20))
        first = np.linalg.eigvalsh(np.asarray(traj.rdms[0]))
        for rdm in traj.rdms:
            assert_allclose(np.linalg.eigvalsh(np.asarray(rdm)), first, atol=1e-10)

    def test_norm_and_energy(self, rng):
        model = make_model(protocol=Protocol.constant(0.2, 20.0))
        traj = evolve(model, random_state(rng, model.dim), TimeGrid(0.0, 20.0, 400, 20))
        assert traj.norm_drift <= 1e-9
        assert np.max(np.abs(traj.total_energy - traj.total_energy[0])) <= 1e-9
        assert traj.n_diagonalizations == 1

    def test_constant_lambda_matches_integrator(self, rng):
        model = make_model(dim_e=16, window=8, protocol=Protocol.constant(0.3, 2.0))
        psi0 = np.asarray(random_state(rng, model.dim))
        h = np.asarray(h_total(model, 0.0))
        traj = evolve(model, psi0, TimeGrid(0.0, 2.0, 40, 4), retain_states=True)
        ref = solve_ivp(
            lambda t, y: -1j * (h @ y),
            (0.0, 2.0),
            psi0,
            method="DOP853",
            t_eval=traj.times,
            rtol=1e-12,
            atol=1e-12,
        )
        for k, state in enumerate(traj.states):
            assert np.max(np.abs(state - ref.y[:, k])) <= 1e-8

    def test_ramp_matches_stepwise_expm(self, rng):
        model = make_model(dim_e=16, window=8, protocol=Protocol(0.0, 1.0, 0.0, 0.5))
        psi = np.asarray(random_state(rng, model.dim))
        grid = TimeGrid(0.0, 1.0, 20, 20)
        traj = evolve(model, psi, grid, dlambda_max=0.0, retain_states=True)
        for step in range(grid.n_steps):
            t_mid = (step + 0.5) * grid.dt
            psi = spl.expm(-1j * np.asarray(h_total(model, t_mid)) * grid.dt) @ psi
        assert_allclose(traj.states[-1], psi, atol=1e-10)
        assert traj.n_diagonalizations == grid.n_steps

    def test_cache_skips_small_lambda_changes(self, rng):
        model = make_model(protocol=Protocol(0.0, 1.0, 0.1, 0.1005))
        traj = evolve(model, random_state(rng, model.dim), TimeGrid(0.0, 1.0, 50, 10), dlambda_max=1e-3)
        assert traj.n_diagonalizations == 1

    def test_retained_states_reproduce_rdms(self, rng, small_model):
        traj = evolve(small_model, random_state(rng, small_model.dim), TimeGrid(0.0, 10.0, 100, 10), retain_states=True)
        for state, rdm in zip(traj.states, traj.rdms):
            full = np.outer(state, state.conj())
            assert_allclose(np.asarray(partial_trace_env(full, 2, small_model.n_e)), np.asarray(rdm), atol=1e-12)

    def test_step_refinement_converges(self, rng, small_model):
        psi = random_state(rng, small_model.dim)
        grid = TimeGrid(0.0, 10.0, 20, 20)
        runs = [evolve(small_model, psi, grid.refined(f), dlambda_max=0.0) for f in (1, 2, 4)]
        coarse = np.max(np.abs(np.asarray(runs[0].rdms[-1]) - np.asarray(runs[1].rdms[-1])))
        fine = np.max(np.abs(np.asarray(runs[1].rdms[-1]) - np.asarray(runs[2].rdms[-1])))
        assert fine <= coarse / 2

    def test_zero_duration(self, rng, small_model):
        traj = evolve(small_model, random_state(rng, small_model.dim), TimeGrid(0.0, 0.0, 1, 1))
        assert len(traj) == 1

    def test_rejects_bad_input(self, small_model):
        with raises(ConfigError):
            evolve(small_model, np.ones(3) / np.sqrt(3), TimeGrid(0.0, 1.0, 10, 1))
        bad = np.full(small_model.dim, np.nan, dtype=complex)
        with raises(NumericalError):
            evolve(small_model, bad, TimeGrid(0.0, 1.0, 10, 1))

    def test_mix_trajectories(self, rng, small_model):
        grid = TimeGrid(0.0, 10.0, 100, 10)
        a = evolve(small_model, random_state(rng, small_model.dim), grid)
        b = evolve(small_model, random_state(rng, small_model.dim), grid)
        mixed = mix_trajectories([a, b], [0.25, 0.75])
        expected = 0.25 * np.asarray(a.rdms[-1]) + 0.75 * np.asarray(b.rdms[-1])
        assert_allclose(np.asarray(mixed.rdms[-1]), expected, atol=1e-12)
        with raises(ConfigError):
            mix_trajectories([a, b], [0.5, 0.6])


class TestInstantaneousBasis:
    def test_diagonal_input_stays_diagonal(self, small_model):
        basis = instantaneous_basis(small_model, 3.0)
        rho = (basis.eigenvectors * np.array([0.7, 0.3])) @ basis.eigenvectors.conj().T
        assert coherence_norm(rdm_in_basis(rho, basis)) < 1e-12

    def test_projector_oracle(self, rng, small_model):
        traj = evolve(small_model, random_state(rng, small_model.dim), TimeGrid(0.0, 10.0, 100, 10))
        t = traj.times[4]
        basis = instantaneous_basis(small_model, t)
        rho = np.asarray(traj.rdm_at(t))
        m = rdm_in_instantaneous_basis(traj, small_model, t)
        for a, b in np.ndindex(2, 2):
            ket_a, ket_b = basis.eigenvectors[:, a], basis.eigenvectors[:, b]
            projected = np.outer(ket_a, ket_a.conj()) @ rho @ np.outer(ket_b, ket_b.conj())
            # <a|rho|b> up to the tracked phase of each column
            assert abs(abs(m[a, b]) - np.linalg.norm(projected)) < 1e-12

    def test_computational_basis_when_uncoupled(self):
        model = make_model(h_s=np.diag([-0.5, 0.5]), protocol=Protocol(0.0, 1.0, 0.0, 0.0))
        basis = instantaneous_basis(model, 0.0)
        assert_allclose(np.abs(basis.eigenvectors), np.eye(2), atol=1e-14)

    def test_degenerate_basis_rejected(self):
        model = make_model(h_s=np.zeros((2, 2)), h_is=np.zeros((2, 2)))
        with raises(NumericalError):
            instantaneous_basis(model, 0.0)

    def test_tracked_phases_are_continuous(self, rng, small_model):
        traj = evolve(small_model, random_state(rng, small_model.dim), TimeGrid(0.0, 10.0, 100, 10))
        bases = traj.bases()
        for prev, cur in zip(bases[:-1], bases[1:]):
            overlaps = np.einsum("ij,ij->j", prev.eigenvectors.conj(), cur.eigenvectors)
            assert np.all(overlaps.real > 0)
        assert instantaneous_series(traj).shape == (len(traj), 2, 2)


class TestNorms:
    def test_diagonal_has_no_coherence(self):
        assert coherence_norm(np.diag([0.2, 0.3, 0.5])) == 0.0

    def test_plus_state(self):
        plus = np.full((2, 2), 0.5)
        assert abs(coherence_norm(plus) - 1 / np.sqrt(2)) < 1e-15

    def test_elementwise_oracle(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        expected = np.sqrt(sum(abs(m[i, j]) ** 2 for i in range(4) for j in range(4) if i != j))
        assert abs(coherence_norm(m) - expected) < 1e-12

    def test_commutator(self):
        h = np.diag([1.0, -1.0])
        assert commutator_norm(np.diag([0.6, 0.4]), h) == 0.0
        assert commutator_norm(np.full((2, 2), 0.5), h) > 0
