import numpy as np
from dataclasses import dataclass
from pointerwork.errors import ConfigError
from pointerwork.hilbert import gershgorin_radius
from pointerwork.model import TotalModel

STABILITY_TARGET = 0.5


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of n_steps steps; every `sample_stride`-th step is recorded.

    n_steps must be a multiple of the stride so that t_end is always sampled.
    """

    t_start: float
    t_end: float
    n_steps: int
    sample_stride: int = 1

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("TimeGrid needs n_steps >= 1, got {}".format(self.n_steps))
        if self.sample_stride < 1 or self.n_steps % self.sample_stride != 0:
            raise ConfigError(
                "Sample stride {} must divide n_steps {}".format(self.sample_stride, self.n_steps)
            )
        if not self.t_end >= self.t_start:
            raise ConfigError("TimeGrid needs t_end >= t_start")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.sample_stride + 1

    @property
    def sample_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.sample_stride)

    @property
    def sample_times(self) -> np.ndarray:
        return self.t_start + self.sample_steps * self.dt

    def refined(self, factor: int = 2) -> "TimeGrid":
        """Same sample times with `factor` times more steps in between."""
        return TimeGrid(self.t_start, self.t_end, self.n_steps * factor, self.sample_stride * factor)


def spectral_radius_bound(model: TotalModel) -> float:
    """Gershgorin bound on ||H(t)|| over the protocol, from the factors alone."""
    lam_max = max(abs(model.protocol.lambda0), abs(model.protocol.lambda1))
    return (
        gershgorin_radius(model.h_s)
        + lam_max * gershgorin_radius(model.h_is) * gershgorin_radius(model.h_ie2)
        + gershgorin_radius(model.h_e2)
    )


def default_time_grid(
    model: TotalModel, t_start: float, t_end: float, n_samples: int = 200
) -> TimeGrid:
    """Grid with dt * (spectral radius bound) <= 0.5 and about n_samples recorded points."""
    radius = spectral_radius_bound(model)
    span = t_end - t_start
    n_samples = max(1, n_samples)
    min_steps = max(1, int(np.ceil(span * radius / STABILITY_TARGET)))
    stride = max(1, int(np.ceil(min_steps / n_samples)))
    n_steps = stride * n_samples
    return TimeGrid(t_start, t_end, n_steps, stride)
