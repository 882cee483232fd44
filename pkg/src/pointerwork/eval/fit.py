import math
import numpy as np
from scipy import stats
from typing import NamedTuple
from pointerwork.errors import ConfigError, InsufficientDecayError

DECAY_FLOOR = 0.2
NO_DECAY = 0.9
MIN_FIT_POINTS = 10
MAX_DEPLETION = 0.2
NOISE_FLOOR = 1e-6


class DecayFit(NamedTuple):
    rate: float
    quality: float
    n_points: int


class TransitionFit(NamedTuple):
    rate: float
    upper_bound: bool
    n_points: int


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int


def _leading_run(mask: np.ndarray) -> int:
    """Length of the initial run of True values."""
    misses = np.flatnonzero(~mask)
    return int(misses[0]) if len(misses) else len(mask)


def _through_origin(x: np.ndarray, y: np.ndarray):
    """Least-squares slope of y = a x, and the coefficient of determination."""
    a = float(np.dot(x, y) / np.dot(x, x))
    return a, _determination(y, a * x)


def _determination(y: np.ndarray, model: np.ndarray) -> float:
    ss_res = float(np.sum((y - model) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)


def _as_series(times, values, name):
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise ConfigError("{} needs matching 1-d times and values".format(name))
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ConfigError("{} needs at least two strictly increasing times".format(name))
    if not v[0] > 0:
        raise ConfigError("{} series must start positive, got {}".format(name, v[0]))
    return t, v


def fit_gaussian_decay(
    times,
    magnitudes,
    floor: float = DECAY_FLOOR,
    min_points: int = MIN_FIT_POINTS,
    no_decay: float = NO_DECAY,
) -> DecayFit:
    """Fit |rho_ab(t)| / |rho_ab(t0)| = exp(-R^2 (t - t0)^2).

    Only the leading run of samples with magnitude >= floor * initial enters the
    fit. R comes from the straight line of ln(m/m0) against (t - t0)^2; the
    quality is the coefficient of determination of the fitted curve against
    m/m0 itself, so the noisy tail near the floor is not amplified by the log.
    """
    t, m = _as_series(times, magnitudes, "Gaussian decay fit")
    ratio = m / m[0]
    if np.min(ratio) >= no_decay:
        raise InsufficientDecayError(
            "Insufficient decay: magnitude never drops below {} of its initial value".format(no_decay)
        )
    n = _leading_run(ratio >= floor)
    if n < min_points:
        raise ConfigError(
            "Gaussian decay fit needs {} points above {} of initial, got {}".format(min_points, floor, n)
        )
    x = (t[:n] - t[0]) ** 2
    y = np.log(ratio[:n])
    a, _ = _through_origin(x, y)
    if not a < 0:
        raise InsufficientDecayError("Fitted Gaussian exponent is not negative ({:.3e})".format(a))
    return DecayFit(rate=math.sqrt(-a), quality=_determination(ratio[:n], np.exp(a * x)), n_points=n)


def fit_transition_rate(
    times,
    population,
    max_depletion: float = MAX_DEPLETION,
    noise_floor: float = NOISE_FLOOR,
) -> TransitionFit:
    """Depletion rate of a prepared level over the early window.

    The early window is the leading run of samples whose depletion 1 - p/p0 stays
    within `max_depletion`. Depletion is linearized as -ln(p/p0), which is exact
    for exponential loss and equals 1 - p/p0 to first order. When depletion never
    clears `noise_floor` the returned rate is an upper bound.
    """
    t, p = _as_series(times, population, "Transition-rate fit")
    depletion = 1.0 - p / p[0]
    span = t[-1] - t[0]
    if np.max(depletion) <= noise_floor:
        return TransitionFit(rate=noise_floor / span, upper_bound=True, n_points=len(t))

    n = _leading_run(depletion <= max_depletion)
    if n < 3:
        raise ConfigError(
            "Early window holds {} samples; sample more finely than {:.3e}".format(n, t[1] - t[0])
        )
    x = t[:n] - t[0]
    y = -np.log(p[:n] / p[0])
    rate, _ = _through_origin(x, y)
    return TransitionFit(rate=max(rate, 0.0), upper_bound=False, n_points=n)


def loglog_slope(x, y, confidence: float = 0.95) -> SlopeFit:
    """Power-law exponent from a straight line in log-log space with a Student-t interval."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if lx.shape != ly.shape or lx.ndim != 1:
        raise ConfigError("Log-log regression needs matching 1-d inputs")
    if not (np.all(np.isfinite(lx)) and np.all(np.isfinite(ly))):
        raise ConfigError("Log-log regression needs strictly positive finite data")
    n = len(lx)
    if n < 2 or np.ptp(lx) == 0:
        raise ConfigError("Log-log regression needs at least two distinct x values, got {}".format(n))

    res = stats.linregress(lx, ly)
    if n > 2:
        half = stats.t.ppf(0.5 + 0.5 * confidence, n - 2) * res.stderr
        ci_low, ci_high = res.slope - half, res.slope + half
    else:
        ci_low = ci_high = math.nan
    return SlopeFit(
        slope=float(res.slope),
        intercept=float(res.intercept),
        stderr=float(res.stderr) if n > 2 else math.nan,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        n_points=n,
    )
