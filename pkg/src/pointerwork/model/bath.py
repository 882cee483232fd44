import numpy as np
from functools import reduce
from typing import Optional
from pointerwork.errors import ConfigError
from pointerwork.hilbert import (
    HermitianOperator,
    SpectralDecomposition,
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Z,
)

MIN_SITES, MAX_SITES = 2, 12


def build_goe_bath(dim: int, scale: float = 1.0, seed: int = 0) -> HermitianOperator:
    """Gaussian Orthogonal Ensemble draw.

    Off-diagonal entries (i < j) have variance scale**2 / dim and diagonal entries
    2 * scale**2 / dim, so the spectrum fills the semicircle [-2 scale, 2 scale].
    """
    if dim < 2:
        raise ConfigError("GOE bath needs dim >= 2, got {}".format(dim))
    if scale <= 0:
        raise ConfigError("GOE scale must be positive, got {}".format(scale))

    rng = np.random.default_rng(seed)
    upper = np.triu(rng.normal(0.0, scale / np.sqrt(dim), size=(dim, dim)), k=1)
    diagonal = rng.normal(0.0, scale * np.sqrt(2.0 / dim), size=dim)
    return HermitianOperator.trusted(upper + upper.T + np.diag(diagonal))


def site_operator(op: np.ndarray, site: int, sites: int) -> np.ndarray:
    factors = [op if k == site else IDENTITY_2 for k in range(sites)]
    return reduce(np.kron, factors)


def build_spin_chain_bath(
    sites: int, j_coupling: float = 1.0, h_x: float = 0.9045, h_z: float = 0.8090
) -> HermitianOperator:
    """Open-boundary Ising chain with transverse and longitudinal fields.

    H = sum_k j sz_k sz_{k+1} + sum_k (h_x sx_k + h_z sz_k). The default fields
    put the chain in its nonintegrable (chaotic) regime.
    """
    if not MIN_SITES <= sites <= MAX_SITES:
        raise ConfigError(
            "Spin chain needs {} <= sites <= {}, got {}".format(MIN_SITES, MAX_SITES, sites)
        )

    sz = [site_operator(SIGMA_Z, k, sites) for k in range(sites)]
    h = np.zeros((2**sites, 2**sites), dtype=complex)
    for k in range(sites - 1):
        h += j_coupling * sz[k] @ sz[k + 1]
    for k in range(sites):
        h += h_x * site_operator(SIGMA_X, k, sites) + h_z * sz[k]

    return HermitianOperator.trusted(h.real if not np.any(h.imag) else h)


def level_spacing_ratio(eigenvalues: np.ndarray, bulk: float = 1.0) -> float:
    """Mean of min(r, 1/r) over consecutive level-spacing ratios.

    About 0.5307 for GOE statistics and 0.386 for Poisson (integrable) spectra.
    `bulk` keeps only the central fraction of the spectrum.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if bulk < 1.0:
        n_cut = int(len(e) * (1.0 - bulk) / 2)
        e = e[n_cut : len(e) - n_cut]
    spacings = np.diff(e)
    s0, s1 = spacings[:-1], spacings[1:]
    keep = np.maximum(s0, s1) > 0
    return float(np.mean(np.minimum(s0[keep], s1[keep]) / np.maximum(s0[keep], s1[keep])))


def build_bath_coupling(
    bath_spectrum: SpectralDecomposition,
    window_indices: np.ndarray,
    seed: int = 1,
    offset: float = 0.0,
    coupling_scale: float = 1.0,
) -> HermitianOperator:
    """Bath interaction factor H_I^{E2} = coupling_scale * (X + offset * I).

    X is an independent GOE draw rescaled so that its off-diagonal matrix
    elements between window eigenstates of H_{E2} have unit mean square.
    """
    if len(window_indices) < 2:
        raise ConfigError("Coupling normalization needs a window of at least two states")
    dim = bath_spectrum.dim
    x = np.asarray(build_goe_bath(dim, 1.0, seed)).real
    w = bath_spectrum.eigenvectors[:, window_indices]
    block = w.conj().T @ x @ w
    off_diagonal = ~np.eye(len(window_indices), dtype=bool)
    rms = np.sqrt(np.mean(np.abs(block[off_diagonal]) ** 2))
    if rms == 0:
        raise ConfigError(
            "Window of {} states is too small to normalize the coupling".format(
                len(window_indices)
            )
        )
    h = coupling_scale * (x / rms + offset * np.eye(dim))
    return HermitianOperator.trusted(h)


def build_bath(
    bath_type: str,
    dim: Optional[int] = None,
    sites: Optional[int] = None,
    scale: float = 1.0,
    seed: int = 0,
    **chain_kwargs,
) -> HermitianOperator:
    """Dispatch on the configured bath family."""
    if bath_type == "goe":
        return build_goe_bath(dim, scale, seed)
    elif bath_type == "spin-chain":
        h = build_spin_chain_bath(sites, **chain_kwargs)
        return HermitianOperator.trusted(scale * np.asarray(h))
    else:
        raise ConfigError("Unknown bath type {}".format(bath_type))
