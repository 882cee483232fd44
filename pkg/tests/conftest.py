import numpy as np
from pytest import fixture
from pointerwork.hilbert import SIGMA_X, SIGMA_Z, HermitianOperator, eig_hermitian
from pointerwork.model import Protocol, TotalModel, WindowSpec, build_bath_coupling, build_goe_bath


def make_model(
    dim_e=32,
    window=16,
    seed=0,
    h_s=None,
    h_is=None,
    offset=0.5,
    coupling_scale=1.0,
    protocol=None,
    bath_scale=1.0,
):
    """Qubit coupled to a small GOE bath; the defaults mirror the demo config at toy size."""
    h_s = HermitianOperator(0.5 * SIGMA_Z) if h_s is None else HermitianOperator(h_s)
    h_is = HermitianOperator(SIGMA_X + 0.3 * SIGMA_Z) if h_is is None else HermitianOperator(h_is)
    h_e2 = build_goe_bath(dim_e, bath_scale, seed)
    spectrum = eig_hermitian(h_e2)
    spec = WindowSpec(window)
    h_ie2 = build_bath_coupling(
        spectrum, spec.indices(spectrum.eigenvalues), seed + 1, offset, coupling_scale
    )
    protocol = Protocol(0.0, 10.0, 0.1, 0.2) if protocol is None else protocol
    return TotalModel(h_s, h_is, h_e2, h_ie2, spec, protocol)


@fixture
def small_model():
    return make_model()


@fixture
def rng():
    return np.random.default_rng(42)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
