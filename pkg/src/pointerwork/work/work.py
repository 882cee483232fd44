import math
import numpy as np
import pandas as pd
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from line_profiler import profile
from scipy.special import logsumexp
from typing import List, NamedTuple, Optional, Sequence, Tuple
from pointerwork.errors import ConfigError, NumericalError
from pointerwork.hilbert import (
    DensityMatrix,
    SpectralDecomposition,
    StateVector,
    eig_hermitian,
    rdm_in_basis,
)
from pointerwork.model import TotalModel, h_s_renormalized
from pointerwork.propagate import (
    DLAMBDA_MAX,
    RdmTrajectory,
    TimeGrid,
    evolve,
    instantaneous_basis,
)

POSITIVITY_ALARM = 1e-8
PROBABILITY_TOL = 1e-10
MERGE_TOL = 1e-9
MIXTURE_CONSISTENCY_TOL = 1e-10


def gibbs_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    if not (np.isfinite(beta) and beta >= 0):
        raise ConfigError("Inverse temperature must be finite and >= 0, got {}".format(beta))
    e = np.asarray(eigenvalues, dtype=float)
    log_w = -beta * (e - e.min())
    return np.exp(log_w - logsumexp(log_w))


def gibbs_state(h, beta: float) -> DensityMatrix:
    spectral = eig_hermitian(h)
    w = gibbs_weights(spectral.eigenvalues, beta)
    v = spectral.eigenvectors
    rho = (v * w) @ v.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def log_partition(h, beta: float) -> float:
    e = eig_hermitian(h).eigenvalues
    return float(logsumexp(-beta * e))


def populations(matrix) -> np.ndarray:
    p = np.real(np.diag(np.asarray(matrix)))
    if np.any(p < -POSITIVITY_ALARM):
        raise NumericalError("Negative population {:.3e} in the RDM diagonal".format(p.min()))
    if abs(p.sum() - 1.0) > PROBABILITY_TOL:
        raise NumericalError("Populations sum to {:.12f}, expected 1".format(p.sum()))
    return p


def mixture_energy(p: np.ndarray, energies: np.ndarray) -> float:
    return float(np.dot(p, energies))


def _mixture_energy_at(traj: RdmTrajectory, model: TotalModel, t: float) -> float:
    rdm = traj.rdm_at(t)
    basis = instantaneous_basis(model, t)
    by_levels = mixture_energy(populations(rdm_in_basis(rdm, basis)), basis.eigenvalues)
    by_trace = float(np.trace(np.asarray(rdm) @ np.asarray(h_s_renormalized(model, t))).real)
    if abs(by_levels - by_trace) > MIXTURE_CONSISTENCY_TOL * max(1.0, abs(by_trace)):
        raise NumericalError(
            "Mixture energy at t={} disagrees with tr(rho H_S^r): {} vs {}".format(t, by_levels, by_trace)
        )
    return by_levels


def mixture_work(traj: RdmTrajectory, model: TotalModel, t0: float, t1: float) -> float:
    """Energy change of the decohered mixture: sum_a p_a E_a at t1 minus the same at t0."""
    if not t1 > t0:
        raise ConfigError("Mixture work needs t1 > t0, got {} and {}".format(t0, t1))
    return _mixture_energy_at(traj, model, t1) - _mixture_energy_at(traj, model, t0)


def level_shift_work(traj: RdmTrajectory, model: TotalModel, t0: float, t1: float) -> float:
    """Work done on the mixture by moving its levels: sum over sampled steps of p_a dE_a.

    Populations are averaged over each step's two ends. With frozen populations
    this equals mixture_work; population changes (transitions, heat) are left out.
    """
    if not t1 > t0:
        raise ConfigError("Level-shift work needs t1 > t0, got {} and {}".format(t0, t1))
    energies, p = [], []
    for k in range(traj.index_of(t0), traj.index_of(t1) + 1):
        basis = instantaneous_basis(model, traj.times[k])
        energies.append(basis.eigenvalues)
        p.append(populations(rdm_in_basis(traj.rdms[k], basis)))
    energies, p = np.array(energies), np.array(p)
    return float(np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(energies, axis=0)))


@dataclass(frozen=True)
class WorkDistribution:
    """Discrete work statistics: (work value, probability) pairs sorted by work value."""

    entries: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ConfigError("Work distribution is empty")
        probs = np.array([p for _, p in self.entries])
        if np.any(probs < 0):
            raise ConfigError("Work distribution has negative probabilities")
        if abs(probs.sum() - 1.0) > PROBABILITY_TOL:
            raise ConfigError("Work probabilities sum to {:.12f}, expected 1".format(probs.sum()))

    @classmethod
    def from_pairs(cls, works: Sequence[float], probs: Sequence[float], merge_tol: float = MERGE_TOL):
        """Sort and merge work values closer than merge_tol, summing their probabilities."""
        works = np.asarray(works, dtype=float)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(works, kind="stable")
        merged = []
        for w, p in zip(works[order], probs[order]):
            if p == 0:
                continue
            if merged and w - merged[-1][2] <= merge_tol:
                total, weighted, _ = merged[-1]
                merged[-1] = (total + p, weighted + p * w, w)
            else:
                merged.append((p, p * w, w))
        return cls(tuple((weighted / total, total) for total, weighted, _ in merged))

    @property
    def works(self) -> np.ndarray:
        return np.array([w for w, _ in self.entries])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    @property
    def mean(self) -> float:
        return float(np.dot(self.works, self.probabilities))

    @property
    def variance(self) -> float:
        return float(np.dot((self.works - self.mean) ** 2, self.probabilities))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"work_value": self.works, "probability": self.probabilities})


class TpmBranches(NamedTuple):
    """One trajectory per initial level |a(t0)> (x) |bath>, weighted by its Gibbs population."""

    weights: np.ndarray
    levels: np.ndarray
    trajectories: List[RdmTrajectory]
    initial_basis: SpectralDecomposition


def branch_state(level_vector: np.ndarray, bath_state) -> np.ndarray:
    return np.kron(np.asarray(level_vector, dtype=complex), np.asarray(bath_state, dtype=complex))


@profile
def tpm_branches(
    model: TotalModel,
    beta: float,
    bath_state: StateVector,
    grid: TimeGrid,
    workers: int = 1,
    dlambda_max: float = DLAMBDA_MAX,
    verbose: int = 0,
) -> TpmBranches:
    """Evolve every Gibbs-populated level of H_S^r(t0) with the bath state attached.

    Branches are independent and run on a thread pool; results keep the level order.
    """
    if np.asarray(bath_state).shape != (model.n_e,):
        raise ConfigError("Bath state must have dim {}".format(model.n_e))
    basis0 = instantaneous_basis(model, grid.t_start)
    weights = gibbs_weights(basis0.eigenvalues, beta)
    levels = np.flatnonzero(weights > 0)

    def run(alpha):
        if verbose > 0:
            print("Evolving TPM branch alpha={} (weight {:.4f}) ...".format(alpha, weights[alpha]))
        psi = branch_state(basis0.eigenvectors[:, alpha], bath_state)
        return evolve(model, psi, grid, dlambda_max=dlambda_max)

    if workers > 1 and len(levels) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(run, levels))
    else:
        trajectories = [run(alpha) for alpha in levels]
    return TpmBranches(weights[levels], levels, trajectories, basis0)


def tpm_work_distribution(
    model: TotalModel,
    beta: float,
    bath_state: StateVector,
    grid: TimeGrid,
    workers: int = 1,
    dlambda_max: float = DLAMBDA_MAX,
    branches: Optional[TpmBranches] = None,
    verbose: int = 0,
) -> WorkDistribution:
    """Two-point measurement of the system energy H_S^r at grid.t_start and grid.t_end."""
    if branches is None:
        branches = tpm_branches(model, beta, bath_state, grid, workers, dlambda_max, verbose)
    e0 = branches.initial_basis.eigenvalues
    basis1 = instantaneous_basis(model, grid.t_end)
    works, probs = [], []
    for p_alpha, alpha, traj in zip(branches.weights, branches.levels, branches.trajectories):
        q = populations(rdm_in_basis(traj.rdms[-1], basis1))
        works.extend(basis1.eigenvalues - e0[alpha])
        probs.extend(p_alpha * np.clip(q, 0.0, None))
    probs = np.asarray(probs)
    return WorkDistribution.from_pairs(works, probs / probs.sum())


class JarzynskiCheck(NamedTuple):
    lhs: float
    delta_f: float
    relative_deviation: float


def jarzynski_check(dist: WorkDistribution, beta: float, h_init, h_final) -> JarzynskiCheck:
    """<exp(-beta W)> against exp(-beta dF), dF from the partition functions of h_init and h_final."""
    if not (np.isfinite(beta) and beta > 0):
        raise ConfigError("Jarzynski check needs a finite beta > 0, got {}".format(beta))
    log_lhs = float(logsumexp(-beta * dist.works, b=dist.probabilities))
    delta_f = -(log_partition(h_final, beta) - log_partition(h_init, beta)) / beta
    deviation = abs(math.expm1(log_lhs + beta * delta_f))
    return JarzynskiCheck(math.exp(log_lhs), delta_f, deviation)


def jarzynski_free_energy(dist: WorkDistribution, beta: float) -> float:
    """Free-energy difference estimated from the work statistics, -(1/beta) ln <exp(-beta W)>."""
    if not (np.isfinite(beta) and beta > 0):
        raise ConfigError("Free-energy estimate needs a finite beta > 0, got {}".format(beta))
    return -float(logsumexp(-beta * dist.works, b=dist.probabilities)) / beta


class EnergyExchange(NamedTuple):
    bath_energy_drift: float
    bath_energy_excursion: float
    total_energy_change: float


def energy_exchange(traj: RdmTrajectory) -> EnergyExchange:
    """How much energy the bath picked up over a run; zero means no heat flowed."""
    bath = traj.bath_energy - traj.bath_energy[0]
    return EnergyExchange(
        bath_energy_drift=float(bath[-1]),
        bath_energy_excursion=float(np.max(np.abs(bath))),
        total_energy_change=float(traj.total_energy[-1] - traj.total_energy[0]),
    )


@dataclass
class WorkRecord:
    mixture_work: float
    tpm: WorkDistribution
    beta: float
    jarzynski_lhs: float
    delta_f: float
    relative_jarzynski_deviation: float
    delta_f_estimate: float = math.nan
    ramp_time: float = math.nan
    residual_coherence: float = math.nan
    bath_energy_drift: float = math.nan
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        target = math.exp(-self.beta * self.delta_f)
        if abs(abs(self.jarzynski_lhs - target) / target - self.relative_jarzynski_deviation) > 1e-9:
            raise ConfigError("Jarzynski deviation is inconsistent with lhs and delta_f")

    @property
    def tpm_mean(self) -> float:
        return self.tpm.mean

    @property
    def discrepancy(self) -> float:
        return abs(self.mixture_work - self.tpm.mean)

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            if k == "tpm":
                continue
            if isinstance(v, float) and not math.isfinite(v):
                v = None
            out[k] = v
        out["tpm"] = {
            "entries": [[w, p] for w, p in self.tpm.entries],
            "mean": self.tpm.mean,
            "variance": self.tpm.variance,
        }
        out["tpm_mean"] = self.tpm.mean
        out["discrepancy"] = self.discrepancy
        return out


def work_record(
    dist: WorkDistribution,
    mixture: float,
    beta: float,
    h_init,
    h_final,
    **extras,
) -> WorkRecord:
    check = jarzynski_check(dist, beta, h_init, h_final)
    known = {k: extras.pop(k) for k in ("ramp_time", "residual_coherence", "bath_energy_drift") if k in extras}
    return WorkRecord(
        mixture_work=mixture,
        tpm=dist,
        beta=beta,
        jarzynski_lhs=check.lhs,
        delta_f=check.delta_f,
        relative_jarzynski_deviation=check.relative_deviation,
        delta_f_estimate=jarzynski_free_energy(dist, beta),
        extras=extras,
        **known,
    )
