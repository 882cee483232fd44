import copy
import numpy as np
from dataclasses import dataclass
from functools import cached_property
from typing import Optional
from pointerwork.errors import ConfigError
from pointerwork.hilbert import (
    HermitianOperator,
    SpectralDecomposition,
    eig_hermitian,
)
from pointerwork.model.protocol import Protocol

REASSEMBLY_TOL = 1e-12


@dataclass(frozen=True)
class WindowSpec:
    """Contiguous block of H_{E2} eigenstates that the bath actually explores.

    The block is centred on `center_index`, or on the eigenvalue closest to
    `center_energy`, or on the spectrum midpoint when neither is given.
    """

    count: int
    center_index: Optional[int] = None
    center_energy: Optional[float] = None

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("Window must contain at least one state, got {}".format(self.count))
        if self.center_index is not None and self.center_energy is not None:
            raise ConfigError("Give either center_index or center_energy, not both")

    @classmethod
    def default(cls, bath_dim: int):
        return cls(count=max(1, bath_dim // 4))

    def indices(self, eigenvalues: np.ndarray) -> np.ndarray:
        n = len(eigenvalues)
        if self.count > n:
            raise ConfigError("Window of {} states exceeds bath dim {}".format(self.count, n))
        if self.center_index is not None:
            center = self.center_index
        elif self.center_energy is not None:
            center = int(np.argmin(np.abs(np.asarray(eigenvalues) - self.center_energy)))
        else:
            center = n // 2
        start = int(np.clip(center - self.count // 2, 0, n - self.count))
        return np.arange(start, start + self.count)


def window_trace(
    h_ie2: HermitianOperator,
    h_e2: HermitianOperator,
    window: WindowSpec,
    spectrum: Optional[SpectralDecomposition] = None,
) -> float:
    """Per-state mean (1/N_w) sum_n <n|h_ie2|n> over the window eigenstates of h_e2."""
    b = np.asarray(h_ie2)
    if b.shape != np.asarray(h_e2).shape:
        raise ConfigError(
            "Bath operators differ in dim: {} vs {}".format(b.shape, np.asarray(h_e2).shape)
        )
    spectrum = eig_hermitian(h_e2) if spectrum is None else spectrum
    w = spectrum.eigenvectors[:, window.indices(spectrum.eigenvalues)]
    diagonal = np.einsum("ij,ij->j", w.conj(), b @ w).real
    return float(np.mean(diagonal))


def _kron_identity(op: np.ndarray, dim_e: int) -> np.ndarray:
    return np.kron(op, np.eye(dim_e))


def _identity_kron(dim_s: int, op: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(dim_s), op)


def _real_if_possible(m: np.ndarray) -> np.ndarray:
    return m.real.copy() if not np.any(m.imag) else m


@dataclass(frozen=True, eq=False)
class TotalModel:
    """System + chaotic bath E2 with a product-form interaction driven by lambda(t).

    H(t) = H_S (x) I + lambda(t) H_I^S (x) H_I^{E2} + I (x) H_{E2}, regrouped as
    H_S^r(t) (x) I + lambda(t) H_I^{r2} + I (x) H_{E2}. The window mean of H_I^{E2}
    is computed once at construction.
    """

    h_s: HermitianOperator
    h_is: HermitianOperator
    h_e2: HermitianOperator
    h_ie2: HermitianOperator
    window: WindowSpec
    protocol: Protocol
    mean_ie2: Optional[float] = None

    def __post_init__(self):
        for name in ("h_s", "h_is", "h_e2", "h_ie2"):
            value = getattr(self, name)
            if not isinstance(value, HermitianOperator):
                object.__setattr__(self, name, HermitianOperator(value))
        if self.h_s.dim != self.h_is.dim:
            raise ConfigError(
                "System Hamiltonian (dim {}) and coupling factor (dim {}) differ".format(
                    self.h_s.dim, self.h_is.dim
                )
            )
        if self.h_e2.dim != self.h_ie2.dim:
            raise ConfigError(
                "Bath Hamiltonian (dim {}) and coupling factor (dim {}) differ".format(
                    self.h_e2.dim, self.h_ie2.dim
                )
            )
        mean = window_trace(self.h_ie2, self.h_e2, self.window, self.bath_spectrum)
        if self.mean_ie2 is None:
            object.__setattr__(self, "mean_ie2", mean)
        elif abs(self.mean_ie2 - mean) > REASSEMBLY_TOL * max(1.0, abs(mean)):
            raise ConfigError(
                "mean_ie2={} disagrees with the window trace {}".format(self.mean_ie2, mean)
            )

    @property
    def n_s(self) -> int:
        return self.h_s.dim

    @property
    def n_e(self) -> int:
        return self.h_e2.dim

    @property
    def dim(self) -> int:
        return self.n_s * self.n_e

    @cached_property
    def bath_spectrum(self) -> SpectralDecomposition:
        return eig_hermitian(self.h_e2)

    @cached_property
    def window_indices(self) -> np.ndarray:
        return self.window.indices(self.bath_spectrum.eigenvalues)

    @cached_property
    def bath_factor(self) -> HermitianOperator:
        """Centred bath factor H_I^{E2} - <H_I^{E2}> I."""
        return HermitianOperator.trusted(np.asarray(self.h_ie2) - self.mean_ie2 * np.eye(self.n_e))

    @cached_property
    def is_coupled(self) -> bool:
        return bool(np.any(np.asarray(self.h_is)) and np.any(np.asarray(self.h_ie2)))

    # full-space pieces, kept real when the inputs are real
    @cached_property
    def _system_full(self) -> np.ndarray:
        return _real_if_possible(_kron_identity(np.asarray(self.h_s), self.n_e))

    @cached_property
    def _system_coupling_full(self) -> np.ndarray:
        return _real_if_possible(_kron_identity(np.asarray(self.h_is), self.n_e))

    @cached_property
    def _bath_full(self) -> np.ndarray:
        return _real_if_possible(_identity_kron(self.n_s, np.asarray(self.h_e2)))

    @cached_property
    def _residual_coupling_full(self) -> np.ndarray:
        return _real_if_possible(np.kron(np.asarray(self.h_is), np.asarray(self.bath_factor)))


def with_protocol(model: TotalModel, protocol: Protocol) -> TotalModel:
    """Same operators and window under another schedule; cached spectra are shared."""
    clone = copy.copy(model)
    object.__setattr__(clone, "protocol", protocol)
    return clone


def h_s_renormalized_at(model: TotalModel, lam: float) -> HermitianOperator:
    return HermitianOperator.trusted(
        np.asarray(model.h_s) + lam * model.mean_ie2 * np.asarray(model.h_is)
    )


def h_s_renormalized(model: TotalModel, t: float) -> HermitianOperator:
    """H_S^r(t) = H_S + lambda(t) <H_I^{E2}> H_I^S."""
    return h_s_renormalized_at(model, model.protocol(t))


def h_i_r2(model: TotalModel) -> HermitianOperator:
    """H_I^{r2} = H_I^S (x) (H_I^{E2} - <H_I^{E2}> I), the centred residual coupling."""
    return HermitianOperator.trusted(model._residual_coupling_full)


def h_total_at(model: TotalModel, lam: float) -> HermitianOperator:
    h = (
        model._system_full
        + lam * model.mean_ie2 * model._system_coupling_full
        + lam * model._residual_coupling_full
        + model._bath_full
    )
    return HermitianOperator.trusted(h)


def h_total(model: TotalModel, t: float) -> HermitianOperator:
    """H(t) = H_S^r(t) (x) I + lambda(t) H_I^{r2} + I (x) H_{E2}."""
    return h_total_at(model, model.protocol(t))


def h_total_direct(model: TotalModel, lam: float) -> np.ndarray:
    return (
        model._system_full
        + lam * np.kron(np.asarray(model.h_is), np.asarray(model.h_ie2))
        + model._bath_full
    )


def reassembly_error(model: TotalModel, lam: float) -> float:
    return float(np.max(np.abs(np.asarray(h_total_at(model, lam)) - h_total_direct(model, lam))))


@dataclass(frozen=True, eq=False)
class PerturbationSplit:
    """H(t0) = H_0 + epsilon H_1 with the perturbation frozen at t0.

    The product form of H_1 is kept alongside the full matrices so that bath-space
    operators (V, H_eff) never need a full-space contraction.
    """

    h0: HermitianOperator
    h1: HermitianOperator
    epsilon: float
    t0: float
    h_s_r0: HermitianOperator
    system_factor: HermitianOperator
    bath_factor: HermitianOperator
    h_e2: HermitianOperator

    @property
    def n_s(self) -> int:
        return self.system_factor.dim

    @property
    def n_e(self) -> int:
        return self.bath_factor.dim


def perturbation_split(model: TotalModel, t0: Optional[float] = None) -> PerturbationSplit:
    """Split at the protocol start: H_0 = H_S^r(t0) (x) I + I (x) H_{E2}, H_1 = H_I^{r2}, eps = lambda(t0)."""
    protocol = model.protocol
    t0 = protocol.t0 if t0 is None else t0
    if abs(t0 - protocol.t0) > 1e-9 * max(1.0, abs(protocol.t0)):
        raise ConfigError(
            "Perturbation split is frozen at the protocol start {}, got {}".format(protocol.t0, t0)
        )
    epsilon = protocol(t0)
    if epsilon == 0 and model.is_coupled:
        raise ConfigError("lambda(t0) = 0 leaves epsilon undefined as a coupling scale")

    h_s_r0 = h_s_renormalized(model, t0)
    h0 = _kron_identity(np.asarray(h_s_r0), model.n_e) + model._bath_full
    return PerturbationSplit(
        h0=HermitianOperator.trusted(h0),
        h1=h_i_r2(model),
        epsilon=epsilon,
        t0=t0,
        h_s_r0=h_s_r0,
        system_factor=model.h_is,
        bath_factor=model.bath_factor,
        h_e2=model.h_e2,
    )


def delta_h_s(model: TotalModel, t: float) -> HermitianOperator:
    """Drift of the renormalized self-Hamiltonian, (lambda(t) - lambda(t0)) <H_I^{E2}> H_I^S."""
    shift = model.protocol(t) - model.protocol(model.protocol.t0)
    return HermitianOperator.trusted(shift * model.mean_ie2 * np.asarray(model.h_is))
