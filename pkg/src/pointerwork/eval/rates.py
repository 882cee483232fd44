import math
import warnings
import numpy as np
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Union
from pointerwork.errors import ConfigError, DegenerateCouplingWarning
from pointerwork.hilbert import HermitianOperator, SpectralDecomposition, eig_hermitian
from pointerwork.model import PerturbationSplit, TotalModel, WindowSpec

MIN_WINDOW = 16
DOS_WINDOW_FRACTION = 0.1


@dataclass
class RateReport:
    """Predicted and measured rates for one level pair (alpha, beta) at one epsilon."""

    epsilon: float
    sigma_v: float
    vnd_sq_mean: float
    delta_mls: float
    epsilon_p: float
    r_d_predicted: float
    r_d_fitted: float
    fit_quality: float
    r_e_predicted: float
    r_e_fitted: float
    rho_e: float
    h1nd_sq_mean: float
    alpha: int = 0
    beta: int = 1
    r_e_upper_bound: bool = False

    def __post_init__(self):
        for name in ("r_d_predicted", "r_d_fitted", "r_e_predicted", "r_e_fitted"):
            value = getattr(self, name)
            if not math.isnan(value) and value < 0:
                raise ConfigError("{} must be nonnegative, got {}".format(name, value))
        if self.vnd_sq_mean > 0 and not self.epsilon_p > 0 and self.sigma_v > 0:
            raise ConfigError("epsilon_p must be positive when vnd_sq_mean > 0")

    @property
    def predicted_ratio(self) -> float:
        return self.r_d_predicted / self.r_e_predicted if self.r_e_predicted > 0 else math.inf

    def to_dict(self) -> dict:
        """JSON-ready dict: infinities and NaNs become null, with an explicit flag for epsilon_p."""
        out = {}
        for k, v in asdict(self).items():
            if isinstance(v, float) and not math.isfinite(v):
                v = None
            out[k] = v
        out["epsilon_p_infinite"] = math.isinf(self.epsilon_p)
        return out


class ElementStats(NamedTuple):
    sigma_v: float
    vnd_sq_mean: float
    delta_mls: float


def system_expectations(h_is: HermitianOperator, basis: SpectralDecomposition) -> np.ndarray:
    """<alpha|H_I^S|alpha> for every eigenvector of the basis."""
    w = basis.eigenvectors
    return np.einsum("ij,ij->j", w.conj(), np.asarray(h_is) @ w).real


def build_v_operator(
    split: PerturbationSplit, alpha: int, beta: int, basis: SpectralDecomposition
) -> HermitianOperator:
    """V = <beta|H_1|beta> - <alpha|H_1|alpha> as a bath-space operator."""
    if alpha == beta:
        raise ConfigError("V needs two distinct levels, got alpha = beta = {}".format(alpha))
    d = system_expectations(split.system_factor, basis)
    c = d[beta] - d[alpha]
    if abs(c) < 1e-14:
        warnings.warn(
            "Levels {} and {} couple identically to the bath: V vanishes".format(alpha, beta),
            DegenerateCouplingWarning,
        )
    return HermitianOperator.trusted(c * np.asarray(split.bath_factor))


def h_eff_bath(
    model: TotalModel, split: PerturbationSplit, alpha: int, basis: SpectralDecomposition
) -> HermitianOperator:
    """H^eff_{E alpha} = H_{E2} + epsilon <alpha|H_1|alpha>."""
    d = system_expectations(split.system_factor, basis)
    return HermitianOperator.trusted(
        np.asarray(model.h_e2) + split.epsilon * d[alpha] * np.asarray(split.bath_factor)
    )


def matrix_element_stats(
    v: HermitianOperator, h_eff: HermitianOperator, window: WindowSpec
) -> ElementStats:
    """sigma_v, mean |V_nn'|^2 (n != n') and mean level spacing over the window eigenstates of h_eff."""
    if window.count < MIN_WINDOW:
        raise ConfigError(
            "Statistics need a window of at least {} states, got {}".format(MIN_WINDOW, window.count)
        )
    spectral = eig_hermitian(h_eff)
    idx = window.indices(spectral.eigenvalues)
    w = spectral.eigenvectors[:, idx]
    block = w.conj().T @ np.asarray(v) @ w

    diagonal = np.diag(block).real
    off_diagonal = ~np.eye(len(idx), dtype=bool)
    energies = spectral.eigenvalues[idx]
    return ElementStats(
        sigma_v=float(np.std(diagonal)),
        vnd_sq_mean=float(np.mean(np.abs(block[off_diagonal]) ** 2)),
        delta_mls=float((energies[-1] - energies[0]) / (len(idx) - 1)),
    )


def perturbative_border(sigma_v: float, delta_mls: float, vnd_sq_mean: float) -> float:
    """epsilon_p from 2 pi epsilon_p <V_nd^2> = sigma_v Delta; infinite when V_nd vanishes."""
    if vnd_sq_mean <= 0:
        return math.inf
    return sigma_v * delta_mls / (2 * math.pi * vnd_sq_mean)


def predict_gaussian_decay(
    epsilon: float,
    sigma_v: float,
    t: Union[float, np.ndarray],
    epsilon_p: Optional[float] = None,
):
    """|rho_ab(t)| / |rho_ab(0)| = exp(-epsilon^2 sigma_v^2 t^2 / 2)."""
    if epsilon_p is not None and epsilon >= epsilon_p:
        warnings.warn(
            "epsilon={:.3e} is above the perturbative border {:.3e}; Gaussian decay not expected".format(
                epsilon, epsilon_p
            )
        )
    return np.exp(-0.5 * (epsilon * sigma_v * np.asarray(t, dtype=float)) ** 2)


def predict_decoherence_rate(epsilon: float, sigma_v: float) -> float:
    """R_d = epsilon sigma_v / sqrt(2), linear in epsilon."""
    if epsilon < 0 or sigma_v < 0:
        raise ConfigError("Decoherence rate needs nonnegative inputs")
    return epsilon * sigma_v / math.sqrt(2)


def predict_fgr_rate(epsilon: float, rho_e: float, h1nd_sq_mean: float) -> float:
    """Golden-rule rate R_E = 2 pi epsilon^2 rho_E <H_1,nd^2>, quadratic in epsilon."""
    if epsilon < 0 or rho_e < 0 or h1nd_sq_mean < 0:
        raise ConfigError("Golden-rule rate needs nonnegative inputs")
    return 2 * math.pi * epsilon**2 * rho_e * h1nd_sq_mean


def density_of_states(eigenvalues: np.ndarray, center: float, width: float) -> float:
    """Number of levels in [center - width/2, center + width/2] per unit energy."""
    if not width > 0:
        raise ConfigError("Density-of-states window needs positive width, got {}".format(width))
    e = np.asarray(eigenvalues)
    count = int(np.count_nonzero(np.abs(e - center) <= 0.5 * width))
    if count == 0:
        raise ConfigError(
            "Empty energy window of width {:.3e} around E={:.4f}".format(width, center)
        )
    return count / width


def total_density_of_states(
    model: TotalModel,
    basis: SpectralDecomposition,
    initial_energy: float,
    fraction: float = DOS_WINDOW_FRACTION,
) -> float:
    """rho_E of H_0 around the initial mean energy.

    The window is `fraction` of the populated H_0 energy spread (system levels
    plus bath window levels), centred on the initial energy.
    """
    bath = model.bath_spectrum.eigenvalues
    h0_levels = (basis.eigenvalues[:, None] + bath[None, :]).ravel()
    populated = basis.eigenvalues[:, None] + bath[model.window_indices][None, :]
    spread = float(populated.max() - populated.min())
    return density_of_states(h0_levels, initial_energy, fraction * spread)


def h1_offdiag_mean_square(model: TotalModel, split: PerturbationSplit, basis: SpectralDecomposition) -> float:
    """Mean |<alpha'|<mu'|H_1|mu>|alpha>|^2 over alpha != alpha' and window bath eigenstates mu, mu'.

    H_1 is a product, so the mean factorizes into a system part and a bath part.
    """
    n_s = basis.dim
    if n_s < 2:
        return 0.0
    w = basis.eigenvectors
    s = w.conj().T @ np.asarray(split.system_factor) @ w
    system_part = np.mean(np.abs(s[~np.eye(n_s, dtype=bool)]) ** 2)

    wb = model.bath_spectrum.eigenvectors[:, model.window_indices]
    b = wb.conj().T @ np.asarray(split.bath_factor) @ wb
    bath_part = np.mean(np.abs(b) ** 2)
    return float(system_part * bath_part)


def rate_report(
    model: TotalModel,
    split: PerturbationSplit,
    alpha: int,
    beta: int,
    initial_energy: float,
    basis: Optional[SpectralDecomposition] = None,
    r_d_fitted: float = math.nan,
    fit_quality: float = math.nan,
    r_e_fitted: float = math.nan,
    r_e_upper_bound: bool = False,
    dos_fraction: float = DOS_WINDOW_FRACTION,
) -> RateReport:
    """Every predicted quantity for the pair (alpha, beta), plus whatever was fitted."""
    basis = eig_hermitian(split.h_s_r0) if basis is None else basis
    v = build_v_operator(split, alpha, beta, basis)
    h_eff = h_eff_bath(model, split, alpha, basis)
    stats = matrix_element_stats(v, h_eff, model.window)
    rho_e = total_density_of_states(model, basis, initial_energy, dos_fraction)
    h1nd = h1_offdiag_mean_square(model, split, basis)
    # the sign of lambda can be absorbed into H_1
    epsilon = abs(split.epsilon)
    return RateReport(
        epsilon=epsilon,
        sigma_v=stats.sigma_v,
        vnd_sq_mean=stats.vnd_sq_mean,
        delta_mls=stats.delta_mls,
        epsilon_p=perturbative_border(stats.sigma_v, stats.delta_mls, stats.vnd_sq_mean),
        r_d_predicted=predict_decoherence_rate(epsilon, stats.sigma_v),
        r_d_fitted=r_d_fitted,
        fit_quality=fit_quality,
        r_e_predicted=predict_fgr_rate(epsilon, rho_e, h1nd),
        r_e_fitted=r_e_fitted,
        rho_e=rho_e,
        h1nd_sq_mean=h1nd,
        alpha=alpha,
        beta=beta,
        r_e_upper_bound=r_e_upper_bound,
    )
