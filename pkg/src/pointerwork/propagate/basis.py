import numpy as np
from typing import List, Optional, Sequence
from pointerwork.errors import NumericalError
from pointerwork.hilbert import SpectralDecomposition, eig_hermitian, rdm_in_basis
from pointerwork.model import TotalModel, h_s_renormalized
from pointerwork.propagate.evolve import RdmTrajectory

DEGENERACY_TOL = 1e-9


def instantaneous_basis(model: TotalModel, t: float) -> SpectralDecomposition:
    """Eigenbasis of H_S^r(t); degenerate spectra are rejected."""
    basis = eig_hermitian(h_s_renormalized(model, t))
    gap = basis.min_gap()
    if gap is not None and gap < DEGENERACY_TOL:
        raise NumericalError(
            "Instantaneous basis ill-defined at t={}: level gap {:.3e}".format(t, gap)
        )
    return basis


def align_basis(basis: SpectralDecomposition, previous: SpectralDecomposition) -> SpectralDecomposition:
    """Rotate each eigenvector's phase to overlap positively with its predecessor."""
    overlaps = np.einsum("ij,ij->j", previous.eigenvectors.conj(), basis.eigenvectors)
    magnitudes = np.abs(overlaps)
    phases = np.where(magnitudes > 0, overlaps / np.where(magnitudes > 0, magnitudes, 1), 1)
    return SpectralDecomposition(basis.eigenvalues, basis.eigenvectors * phases.conj()[None, :])


def tracked_bases(model: TotalModel, times: Sequence[float]) -> List[SpectralDecomposition]:
    bases, previous = [], None
    for t in times:
        basis = instantaneous_basis(model, t)
        if previous is not None:
            basis = align_basis(basis, previous)
        bases.append(basis)
        previous = basis
    return bases


def rdm_in_instantaneous_basis(
    traj: RdmTrajectory, model: Optional[TotalModel], t: float
) -> np.ndarray:
    """rho^S_{alpha beta}(t) = <alpha(t)|rho^S(t)|beta(t)> in the tracked eigenbasis of H_S^r(t)."""
    k = traj.index_of(t)
    if model is None or model is traj.model:
        basis = traj.bases()[k]
    else:
        basis = tracked_bases(model, traj.times[: k + 1])[-1]
    return rdm_in_basis(traj.rdms[k], basis)


def instantaneous_series(traj: RdmTrajectory) -> np.ndarray:
    return np.stack([rdm_in_basis(rdm, basis) for rdm, basis in zip(traj.rdms, traj.bases())])


def coherence_norm(matrix: np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part."""
    m = np.asarray(matrix)
    off = m - np.diag(np.diag(m))
    return float(np.linalg.norm(off))


def commutator_norm(rdm, h) -> float:
    """Frobenius norm of [rho, h]; zero when rho is diagonal in the eigenbasis of h."""
    r, m = np.asarray(rdm), np.asarray(h)
    return float(np.linalg.norm(r @ m - m @ r))
