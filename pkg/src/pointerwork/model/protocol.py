import numpy as np
from dataclasses import dataclass
from typing import Union
from pointerwork.errors import ConfigError

SHAPES = ("constant", "linear-ramp", "smooth-ramp")
TIME_TOL = 1e-9


@dataclass(frozen=True)
class Protocol:
    """Control schedule lambda(t) on [t0, t1].

    lambda(t) stands in for the expectation value of the regular environment
    part's interaction operator (the position of a piston, say).
    """

    t0: float
    t1: float
    lambda0: float
    lambda1: float
    shape: str = "linear-ramp"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError("Protocol shape must be one of {}, got {}".format(SHAPES, self.shape))
        if not self.t1 > self.t0:
            raise ConfigError("Protocol needs t1 > t0, got [{}, {}]".format(self.t0, self.t1))
        if self.shape == "constant" and self.lambda1 != self.lambda0:
            raise ConfigError("Constant protocol needs lambda1 == lambda0")

    @classmethod
    def constant(cls, value: float, duration: float, t0: float = 0.0):
        return cls(t0, t0 + duration, value, value, "constant")

    @property
    def duration(self) -> float:
        return self.t1 - self.t0

    def contains(self, t: float) -> bool:
        tol = TIME_TOL * max(1.0, abs(self.t1))
        return self.t0 - tol <= t <= self.t1 + tol

    def fraction(self, t: Union[float, np.ndarray]):
        """Normalized progress s(t) in [0, 1] according to the shape."""
        s = np.clip((np.asarray(t, dtype=float) - self.t0) / self.duration, 0.0, 1.0)
        if self.shape == "constant":
            return np.zeros_like(s)
        elif self.shape == "linear-ramp":
            return s
        return 0.5 * (1.0 - np.cos(np.pi * s))

    def __call__(self, t: float) -> float:
        if not self.contains(t):
            raise ConfigError(
                "Time {} lies outside the protocol window [{}, {}]".format(t, self.t0, self.t1)
            )
        return float(self.lambda0 + (self.lambda1 - self.lambda0) * self.fraction(t))

    lambda_at = __call__
