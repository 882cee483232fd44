import numpy as np
from dataclasses import dataclass
from typing import Optional
from pointerwork.errors import ConfigError

HERMITIAN_TOL = 1e-12  # absolute, elementwise
UNITARY_TOL = 1e-10
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": IDENTITY_2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def as_square(matrix, name: str = "matrix") -> np.ndarray:
    """Complex 2D view of a carrier or array, rejecting non-square input."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ConfigError("{} must be square with dim >= 1, got shape {}".format(name, m.shape))
    return m


def hermiticity_error(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


class _Carrier:
    """Shared array plumbing: carriers behave like read-only numpy arrays."""

    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def trusted(cls, entries: np.ndarray):
        """Wrap entries that hold the invariants by construction, skipping the checks."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "entries", _frozen(entries))
        return obj


@dataclass(frozen=True, eq=False)
class HermitianOperator(_Carrier):
    """Dense Hermitian matrix (hbar = 1, dimensionless energies)."""

    entries: np.ndarray

    def __post_init__(self):
        m = as_square(self.entries, "HermitianOperator")
        err = hermiticity_error(m)
        if err > HERMITIAN_TOL:
            raise ConfigError("Operator is not Hermitian (max deviation {:.3e})".format(err))
        object.__setattr__(self, "entries", _frozen(m))

    def __add__(self, other):
        return HermitianOperator(self.entries + np.asarray(other))

    def __sub__(self, other):
        return HermitianOperator(self.entries - np.asarray(other))

    def __mul__(self, scalar: float):
        return HermitianOperator(self.entries * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class UnitaryOperator(_Carrier):
    entries: np.ndarray

    def __post_init__(self):
        m = as_square(self.entries, "UnitaryOperator")
        err = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if err > UNITARY_TOL:
            raise ConfigError("Operator is not unitary (max deviation {:.3e})".format(err))
        object.__setattr__(self, "entries", _frozen(m))

    def __matmul__(self, other):
        if isinstance(other, UnitaryOperator):
            return UnitaryOperator.trusted(self.entries @ other.entries)
        if isinstance(other, StateVector):
            return StateVector.trusted(self.entries @ other.amplitudes)
        return self.entries @ np.asarray(other)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of the (composite) Hilbert space."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise ConfigError("StateVector needs a 1D amplitude vector, got shape {}".format(a.shape))
        if not np.all(np.isfinite(a)):
            raise ConfigError("StateVector has non-finite amplitudes")
        norm = float(np.linalg.norm(a))
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigError("StateVector is not normalized (norm {:.12f})".format(norm))
        object.__setattr__(self, "amplitudes", _frozen_vector(a))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.amplitudes
        return self.amplitudes.astype(dtype)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def trusted(cls, amplitudes: np.ndarray):
        obj = object.__new__(cls)
        object.__setattr__(obj, "amplitudes", _frozen_vector(amplitudes))
        return obj

    @classmethod
    def normalized(cls, amplitudes):
        """Normalize arbitrary nonzero amplitudes into a state."""
        a = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(a)
        if not np.isfinite(norm) or norm == 0:
            raise ConfigError("Cannot normalize a zero or non-finite vector")
        return cls(a / norm)

    def projector(self) -> "DensityMatrix":
        return DensityMatrix.trusted(np.outer(self.amplitudes, self.amplitudes.conj()))


def _frozen_vector(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DensityMatrix(_Carrier):
    entries: np.ndarray

    def __post_init__(self):
        m = as_square(self.entries, "DensityMatrix")
        err = hermiticity_error(m)
        if err > HERMITIAN_TOL:
            raise ConfigError("Density matrix is not Hermitian (max deviation {:.3e})".format(err))
        trace = np.trace(m).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ConfigError("Density matrix trace is {:.12f}, expected 1".format(trace))
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -POSITIVITY_TOL:
            raise ConfigError("Density matrix has negative eigenvalue {:.3e}".format(smallest))
        object.__setattr__(self, "entries", _frozen(m))

    @classmethod
    def maximally_mixed(cls, dim: int):
        return cls.trusted(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of a Hermitian operator; column k of eigenvectors belongs to eigenvalue k."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        values = np.array(self.eigenvalues, dtype=float)
        vectors = np.array(self.eigenvectors, dtype=complex)
        if vectors.shape != (values.size, values.size):
            raise ConfigError(
                "Eigenvector matrix shape {} does not match {} eigenvalues".format(
                    vectors.shape, values.size
                )
            )
        if np.any(np.diff(values) < 0):
            raise ConfigError("Eigenvalues must be nondecreasing")
        values.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "eigenvectors", vectors)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def min_gap(self) -> Optional[float]:
        if self.dim < 2:
            return None
        return float(np.min(np.diff(self.eigenvalues)))
