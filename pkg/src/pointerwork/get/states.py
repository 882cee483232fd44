import numpy as np
from typing import Optional
from pointerwork.errors import ConfigError
from pointerwork.hilbert import SpectralDecomposition, StateVector
from pointerwork.model import TotalModel
from pointerwork.propagate import TimeGrid, default_time_grid

# the bath state draws from its own stream, clear of the bath (seed) and coupling (seed + 1)
BATH_STATE_SEED_OFFSET = 2


def bath_state(
    model: TotalModel,
    kind: str = "typical",
    seed: int = 0,
    width: Optional[float] = None,
) -> StateVector:
    """Initial state of the bath, confined to the window eigenstates of H_{E2}.

    "typical" is a random-phase superposition of window eigenstates whose
    moduli follow a Gaussian energy envelope (default width: a quarter of the
    window's energy span), so its weights are fixed by the envelope alone;
    "eigenstate" is the single eigenstate at the middle of the window.
    """
    spectrum = model.bath_spectrum
    idx = model.window_indices
    if kind == "eigenstate":
        return StateVector(spectrum.eigenvectors[:, idx[len(idx) // 2]])
    elif kind != "typical":
        raise ConfigError("Unknown bath state kind {}".format(kind))

    energies = spectrum.eigenvalues[idx]
    center = 0.5 * (energies[0] + energies[-1])
    if width is None:
        width = 0.25 * (energies[-1] - energies[0])
    if not width > 0:
        raise ConfigError("Bath state width must be positive, got {}".format(width))

    rng = np.random.default_rng(seed + BATH_STATE_SEED_OFFSET)
    phases = np.exp(2j * np.pi * rng.random(len(idx)))
    envelope = np.exp(-((energies - center) ** 2) / (4 * width**2))
    return StateVector.normalized(spectrum.eigenvectors[:, idx] @ (phases * envelope))


def level_state(basis: SpectralDecomposition, bath: StateVector, alpha: int) -> StateVector:
    """|alpha> (x) |bath>."""
    return StateVector.trusted(np.kron(basis.eigenvectors[:, alpha], np.asarray(bath)))


def coherent_state(basis: SpectralDecomposition, bath: StateVector, alpha: int, beta: int) -> StateVector:
    """(|alpha> + |beta>)/sqrt(2) (x) |bath>."""
    if alpha == beta:
        raise ConfigError("Coherent state needs two distinct levels")
    system = (basis.eigenvectors[:, alpha] + basis.eigenvectors[:, beta]) / np.sqrt(2)
    return StateVector.trusted(np.kron(system, np.asarray(bath)))


def time_grid(
    model: TotalModel,
    t_start: float,
    t_end: float,
    numerics_config: dict,
) -> TimeGrid:
    """Configured grid: a fixed dt if numerics.dt is set, otherwise the Gershgorin default."""
    n_samples = int(numerics_config["n_samples"])
    dt = numerics_config["dt"]
    if dt is None:
        return default_time_grid(model, t_start, t_end, n_samples)
    span = t_end - t_start
    min_steps = max(1, int(np.ceil(span / float(dt))))
    stride = max(1, int(np.ceil(min_steps / n_samples)))
    return TimeGrid(t_start, t_end, stride * n_samples, stride)
