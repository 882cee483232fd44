import numpy as np
import yaml
from numpy.testing import assert_allclose
from pytest import fixture, mark, raises
from pointerwork import get
from pointerwork.errors import ConfigError
from pointerwork.hilbert import SIGMA_X, SIGMA_Z
from pointerwork.params import PARAM_KEYS, read
from pointerwork.propagate import instantaneous_basis


@fixture
def write_config(tmp_path):
    def write(blocks, name="config.yaml"):
        path = tmp_path / name
        with open(path, "w") as f:
            yaml.safe_dump(blocks, f)
        return path

    return write


def small(**model):
    base = dict(bath_dim=64, window_count=16)
    base.update(model)
    return {"model": base}


class TestDefaults:
    def test_missing_keys_filled(self):
        config = read.fill_defaults({"model": {"bath_dim": 256}})
        assert config["model"]["bath_dim"] == 256
        assert config["model"]["h_s"] == PARAM_KEYS["model"]["h_s"]
        assert set(config) == set(PARAM_KEYS)

    def test_defaults_not_shared(self):
        config = read.fill_defaults({})
        config["sweep"]["seeds"].append(7)
        assert PARAM_KEYS["sweep"]["seeds"] == [0]

    def test_unknown_block_and_key(self):
        with raises(ConfigError):
            read.fill_defaults({"training": {}})
        with raises(ConfigError):
            read.fill_defaults({"model": {"bath_size": 4}})

    def test_exponent_strings(self):
        config = read.fill_defaults({"numerics": {"dlambda_max": "1e-3"}, "output": {"directory": "1e3"}})
        assert config["numerics"]["dlambda_max"] == 1e-3
        assert config["output"]["directory"] == "1e3"

    def test_overrides(self):
        config = read.apply_overrides(read.fill_defaults({}), {"sweep.seeds": [3]})
        assert config["sweep"]["seeds"] == [3]
        with raises(ConfigError):
            read.apply_overrides(config, {"sweep.seed": 3})


class TestValidate:
    def test_defaults_are_valid(self):
        read.validate(read.fill_defaults({}))

    @mark.parametrize(
        "blocks",
        [
            small(window_count=8),
            small(window_count=128),
            small(bath_type="poisson"),
            small(h_is=[[0, 1], [0, 0]]),
            small(h_s={"zz": 1.0}),
            small(window_center_index=3, window_center_energy=0.0),
            {"protocol": {"t0": 5.0, "t1": 1.0}},
            {"protocol": {"shape": "constant"}},
            {"sweep": {"alpha": 1, "beta": 1}},
            {"sweep": {"epsilons": [1e-3, -1e-3]}},
            {"sweep": {"seeds": []}},
            {"numerics": {"decay_floor": 1.5}},
            {"numerics": {"min_fit_points": 2}},
            {"work": {"beta": 0.0}},
            {"output": {"formats": ["png"]}},
            {"model": {"bath_type": "spin-chain", "bath_sites": 14}},
        ],
    )
    def test_rejects(self, blocks):
        with raises(ConfigError):
            read.validate(read.fill_defaults(blocks))

    def test_config_dumps_resolved_yaml(self, write_config, tmp_path):
        out = tmp_path / "out"
        path = write_config(dict(small(), output={"directory": str(out), "verbose": 0}))
        config = read.config(path)
        with open(out / "run_config.yaml") as f:
            assert yaml.safe_load(f) == config

    def test_current_directory(self, write_config, tmp_path):
        path = write_config(dict(small(), output={"directory": "current", "verbose": 0}))
        config = read.config(path)
        assert (tmp_path / "run_config.yaml").is_file()
        assert config["output"]["directory"] == str(tmp_path) + "/"

    def test_missing_file(self, tmp_path):
        with raises(ConfigError):
            read.config(tmp_path / "nope.yaml")

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with raises(ConfigError):
            read.config(path)


class TestFactories:
    def test_pauli_strings(self):
        h = get.system_operator({"x": 1.0, "z": 0.3}, 2)
        assert_allclose(np.asarray(h), SIGMA_X + 0.3 * SIGMA_Z)
        zz = get.system_operator({"zz": 1.0}, 4)
        assert_allclose(np.diag(np.asarray(zz)).real, [1, -1, -1, 1])

    def test_matrix_spec(self):
        h = get.system_operator([[1.0, 0.5], [0.5, -1.0]], 2)
        assert_allclose(np.asarray(h), [[1.0, 0.5], [0.5, -1.0]])

    @mark.parametrize("spec, dim", [({"x": 1.0}, 3), ({"q": 1.0}, 2), ([[1.0, 0.0]], 2)])
    def test_bad_specs(self, spec, dim):
        with raises(ConfigError):
            get.system_operator(spec, dim)

    def test_bath_dim(self):
        assert get.bath_dim({"bath_type": "spin-chain", "bath_sites": 6, "bath_dim": 1024}) == 64
        assert get.bath_dim({"bath_type": "goe", "bath_sites": 6, "bath_dim": 128}) == 128

    def test_model_from_config(self):
        config = read.validate(read.fill_defaults(small()))
        model = get.model(config["model"], get.protocol(config["protocol"]), seed=2, verbose=0)
        assert model.dim == 128
        assert model.window.count == 16
        assert_allclose(np.asarray(model.h_s), 0.5 * SIGMA_Z)

    def test_spin_chain_model(self):
        config = read.validate(read.fill_defaults(small(bath_type="spin-chain", bath_sites=5)))
        model = get.model(config["model"], get.protocol(config["protocol"]), verbose=0)
        assert model.n_e == 32

    def test_typical_bath_state_lives_in_window(self, small_model):
        state = np.asarray(get.bath_state(small_model, "typical", seed=1))
        w = small_model.bath_spectrum.eigenvectors[:, small_model.window_indices]
        assert abs(np.linalg.norm(w.conj().T @ state) - 1.0) < 1e-12
        again = np.asarray(get.bath_state(small_model, "typical", seed=1))
        assert_allclose(state, again)

    def test_typical_weights_follow_envelope(self, small_model):
        # only the phases are random: two seeds put the same weight on every window state
        w = small_model.bath_spectrum.eigenvectors[:, small_model.window_indices]
        a = np.abs(w.conj().T @ np.asarray(get.bath_state(small_model, "typical", seed=1))) ** 2
        b = np.abs(w.conj().T @ np.asarray(get.bath_state(small_model, "typical", seed=2))) ** 2
        assert_allclose(a, b, atol=1e-12)
        energies = small_model.bath_spectrum.eigenvalues[small_model.window_indices]
        assert np.argmax(a) == np.argmin(np.abs(energies - 0.5 * (energies[0] + energies[-1])))

    def test_eigenstate_bath_state(self, small_model):
        state = np.asarray(get.bath_state(small_model, "eigenstate"))
        idx = small_model.window_indices[len(small_model.window_indices) // 2]
        assert_allclose(state, small_model.bath_spectrum.eigenvectors[:, idx])

    def test_coherent_state(self, small_model):
        basis = instantaneous_basis(small_model, 0.0)
        bath = get.bath_state(small_model)
        psi = np.asarray(get.coherent_state(basis, bath, 0, 1))
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
        with raises(ConfigError):
            get.coherent_state(basis, bath, 1, 1)

    def test_time_grid_with_fixed_dt(self, small_model):
        numerics = dict(PARAM_KEYS["numerics"], dt=0.01, n_samples=50)
        grid = get.time_grid(small_model, 0.0, 10.0, numerics)
        assert grid.dt <= 0.01
        assert grid.n_samples == 51
