import numpy as np
import tqdm
from dataclasses import dataclass, field
from line_profiler import profile
from typing import List, Optional, Sequence, Union
from pointerwork.errors import ConfigError, NumericalError
from pointerwork.hilbert import (
    DensityMatrix,
    SpectralDecomposition,
    StateVector,
    eig_hermitian,
    reduced_state,
)
from pointerwork.model import TotalModel, h_total_at
from pointerwork.propagate.grid import TimeGrid

DLAMBDA_MAX = 1e-3
NORM_DRIFT_TOL = 1e-9


class PropagatorCache:
    """Spectral decomposition of H at the last lambda it was diagonalized for.

    A new diagonalization happens only when the requested lambda has moved by
    more than `dlambda_max` from the cached one; dlambda_max = 0 re-diagonalizes
    on every change.
    """

    def __init__(self, model: TotalModel, dlambda_max: float = DLAMBDA_MAX, verbose: int = 0):
        self.model = model
        self.dlambda_max = dlambda_max
        self.verbose = verbose
        self.lam = None
        self.spectral = None
        self.n_diagonalizations = 0

    def stale(self, lam: float) -> bool:
        return self.lam is None or abs(lam - self.lam) > self.dlambda_max

    def update(self, lam: float) -> SpectralDecomposition:
        if self.verbose > 1:
            print("Diagonalizing total Hamiltonian at lambda={:.6f} ...".format(lam))
        self.spectral = eig_hermitian(h_total_at(self.model, lam))
        self.lam = lam
        self.n_diagonalizations += 1
        return self.spectral


@dataclass(eq=False)
class RdmTrajectory:
    """Reduced density matrices of the system at the sampled times.

    RDMs are stored in the computational basis; `basis_at` gives the phase-tracked
    eigenbasis of H_S^r(t) at a recorded time.
    """

    times: np.ndarray
    rdms: List[DensityMatrix]
    model: TotalModel
    total_energy: np.ndarray
    bath_energy: np.ndarray
    norm_drift: float = 0.0
    n_diagonalizations: int = 0
    states: Optional[List[np.ndarray]] = None
    _bases: Optional[List[SpectralDecomposition]] = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.rdms):
            raise ConfigError("Trajectory has {} times but {} RDMs".format(len(self.times), len(self.rdms)))
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("Trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def index_of(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-9 * max(1.0, abs(t))))
        if len(hits) == 0:
            raise ConfigError("Time {} is not a recorded sample".format(t))
        return int(hits[0])

    def rdm_at(self, t: float) -> DensityMatrix:
        return self.rdms[self.index_of(t)]

    def bases(self) -> List[SpectralDecomposition]:
        if self._bases is None:
            from pointerwork.propagate.basis import tracked_bases

            self._bases = tracked_bases(self.model, self.times)
        return self._bases

    def basis_at(self, t: float) -> SpectralDecomposition:
        return self.bases()[self.index_of(t)]


def _bath_energy(psi: np.ndarray, h_e2: np.ndarray, n_s: int) -> float:
    block = psi.reshape(n_s, -1)
    return float(np.vdot(block, block @ h_e2.T).real)


@profile
def evolve(
    model: TotalModel,
    initial: Union[StateVector, np.ndarray],
    grid: TimeGrid,
    dlambda_max: float = DLAMBDA_MAX,
    retain_states: bool = False,
    verbose: int = 0,
) -> RdmTrajectory:
    """Piecewise-frozen propagation of the total state under H(t).

    Each step applies exp(-i H(lambda(t_mid)) dt) using the cached spectral
    decomposition. Between diagonalizations the state is kept in the eigenbasis
    of the cached H, so a run of steps sharing one propagator costs a single
    phase rotation.
    """
    psi = np.array(initial, dtype=complex)
    if psi.shape != (model.dim,):
        raise ConfigError(
            "Initial state has shape {}, expected ({},)".format(psi.shape, model.dim)
        )
    if not np.all(np.isfinite(psi)):
        raise NumericalError("Initial state has non-finite amplitudes")

    dt = grid.dt
    h_e2 = np.asarray(model.h_e2)
    cache = PropagatorCache(model, dlambda_max, verbose)
    coeffs, pending = None, 0

    times, rdms, energies, bath_energies, states = [], [], [], [], []
    max_drift = 0.0

    def record(t, psi, energy):
        nonlocal max_drift
        if not np.all(np.isfinite(psi)):
            raise NumericalError("Non-finite amplitudes at t={}".format(t))
        max_drift = max(max_drift, abs(np.linalg.norm(psi) - 1.0))
        try:
            rdms.append(DensityMatrix(reduced_state(psi, model.n_s, model.n_e)))
        except ConfigError as err:
            raise NumericalError("RDM lost its invariants at t={}: {}".format(t, err))
        times.append(t)
        energies.append(energy)
        bath_energies.append(_bath_energy(psi, h_e2, model.n_s))
        if retain_states:
            states.append(psi.copy())

    def flush():
        # apply the pending phase rotation and return to the computational basis
        nonlocal coeffs, pending
        coeffs = coeffs * np.exp(-1j * cache.spectral.eigenvalues * dt * pending)
        pending = 0
        return cache.spectral.eigenvectors @ coeffs

    def cached_energy():
        return float(np.sum(np.abs(coeffs) ** 2 * cache.spectral.eigenvalues))

    # the t_start sample uses H at the first midpoint, i.e. the propagator of step 0
    lam = model.protocol(grid.t_start + 0.5 * dt)
    cache.update(lam)
    coeffs = cache.spectral.eigenvectors.conj().T @ psi
    record(grid.t_start, psi, cached_energy())

    # a zero-duration grid records only the initial sample
    steps = range(grid.n_steps if dt > 0 else 0)
    if verbose > 0:
        steps = tqdm.tqdm(steps, desc="evolve", leave=False)
    for step in steps:
        t_mid = grid.t_start + (step + 0.5) * dt
        lam = model.protocol(t_mid)
        if cache.stale(lam):
            psi = flush()
            cache.update(lam)
            coeffs = cache.spectral.eigenvectors.conj().T @ psi
        pending += 1

        if (step + 1) % grid.sample_stride == 0:
            psi = flush()
            record(grid.t_start + (step + 1) * dt, psi, cached_energy())

    if max_drift > NORM_DRIFT_TOL:
        raise NumericalError("Norm drifted by {:.3e} over the run".format(max_drift))

    return RdmTrajectory(
        times=np.array(times),
        rdms=rdms,
        model=model,
        total_energy=np.array(energies),
        bath_energy=np.array(bath_energies),
        norm_drift=max_drift,
        n_diagonalizations=cache.n_diagonalizations,
        states=states if retain_states else None,
    )


def mix_trajectories(trajectories: Sequence[RdmTrajectory], weights: Sequence[float]) -> RdmTrajectory:
    """Weighted ensemble of branch trajectories, i.e. the evolution of a mixed initial state."""
    weights = np.asarray(weights, dtype=float)
    if len(trajectories) != len(weights) or len(trajectories) == 0:
        raise ConfigError("Need one weight per trajectory")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-10:
        raise ConfigError("Mixture weights must be nonnegative and sum to 1")
    first = trajectories[0]
    for traj in trajectories[1:]:
        if len(traj.times) != len(first.times) or np.any(traj.times != first.times):
            raise ConfigError("Branch trajectories must share their sample times")

    rdms = []
    for k in range(len(first.times)):
        mixed = sum(w * np.asarray(traj.rdms[k]) for w, traj in zip(weights, trajectories))
        rdms.append(DensityMatrix(0.5 * (mixed + mixed.conj().T)))

    return RdmTrajectory(
        times=first.times.copy(),
        rdms=rdms,
        model=first.model,
        total_energy=sum(w * traj.total_energy for w, traj in zip(weights, trajectories)),
        bath_energy=sum(w * traj.bath_energy for w, traj in zip(weights, trajectories)),
        norm_drift=max(traj.norm_drift for traj in trajectories),
        n_diagonalizations=sum(traj.n_diagonalizations for traj in trajectories),
    )
