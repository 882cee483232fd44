import numpy as np
import scipy.linalg as spl
from typing import Union
from pointerwork.errors import ConfigError
from pointerwork.hilbert.operators import (
    DensityMatrix,
    HermitianOperator,
    SpectralDecomposition,
    StateVector,
    UnitaryOperator,
    as_square,
)

Operator = Union[HermitianOperator, DensityMatrix, np.ndarray]


def tensor(a: Operator, b: Operator):
    """Kronecker product with the system factor on the left (system index is the slow one).

    Entry ((i * dim_b + k), (j * dim_b + l)) equals a[i, j] * b[k, l]. Carriers of
    the same kind are preserved (Hermitian x Hermitian stays Hermitian, density x
    density stays a density matrix); anything else comes back as an ndarray.
    """
    product = np.kron(as_square(a, "left factor"), as_square(b, "right factor"))
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator.trusted(product)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix.trusted(product)
    return product


def partial_trace_env(rho: Operator, dim_s: int, dim_e: int) -> DensityMatrix:
    """Trace out the environment: result[i, j] = sum_k rho[i*dim_e + k, j*dim_e + k]."""
    m = as_square(rho, "rho")
    if m.shape[0] != dim_s * dim_e:
        raise ConfigError(
            "Cannot trace a dim-{} operator over a {}x{} composite space".format(
                m.shape[0], dim_s, dim_e
            )
        )
    reduced = np.einsum("ikjk->ij", m.reshape(dim_s, dim_e, dim_s, dim_e))
    return DensityMatrix(reduced)


def reduced_state(state: Union[StateVector, np.ndarray], dim_s: int, dim_e: int) -> np.ndarray:
    """System RDM of a pure composite state without forming the full projector."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (dim_s * dim_e,):
        raise ConfigError(
            "State of dim {} does not live on a {}x{} composite space".format(
                psi.shape, dim_s, dim_e
            )
        )
    block = psi.reshape(dim_s, dim_e)
    rdm = block @ block.conj().T
    # symmetrize away BLAS rounding so the Hermiticity invariant holds exactly
    return 0.5 * (rdm + rdm.conj().T)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every column real and positive."""
    vectors = np.array(vectors, dtype=complex)
    rows = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[rows, np.arange(vectors.shape[1])]
    vectors *= (pivots.conj() / np.abs(pivots))[None, :]
    return vectors


def eig_hermitian(h: Operator) -> SpectralDecomposition:
    """Ascending eigenpairs of a Hermitian matrix with the fixed phase convention."""
    if not isinstance(h, HermitianOperator):
        h = HermitianOperator(h)
    m = h.entries
    if not np.any(m.imag):
        values, vectors = spl.eigh(m.real, check_finite=False)
    else:
        values, vectors = spl.eigh(m, check_finite=False)
    return SpectralDecomposition(values, fix_phases(vectors))


def unitary_step(h: Union[Operator, SpectralDecomposition], dt: float) -> UnitaryOperator:
    if not np.isfinite(dt):
        raise ConfigError("Time step must be finite, got {}".format(dt))
    spectral = h if isinstance(h, SpectralDecomposition) else eig_hermitian(h)
    v = spectral.eigenvectors
    phases = np.exp(-1j * spectral.eigenvalues * dt)
    return UnitaryOperator.trusted((v * phases) @ v.conj().T)


def rdm_in_basis(rdm: Operator, basis: SpectralDecomposition) -> np.ndarray:
    w = basis.eigenvectors
    return w.conj().T @ np.asarray(rdm, dtype=complex) @ w


def expectation(op: Operator, state: Union[StateVector, np.ndarray]) -> float:
    psi = np.asarray(state, dtype=complex)
    return float(np.vdot(psi, np.asarray(op) @ psi).real)


def gershgorin_radius(h: Operator) -> float:
    """Upper bound on the spectral radius from Gershgorin discs."""
    m = np.asarray(h)
    return float(np.max(np.sum(np.abs(m), axis=1)))
