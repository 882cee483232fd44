import numpy as np
from pathlib import Path
from typing import Optional
from pointerwork.errors import NumericalError
from pointerwork.eval import fit_gaussian_decay, fit_transition_rate, loglog_slope
from pointerwork.run.io import write_json

RATE_TOL = 1e-6
SLOPE_TOL = 1e-6
TRANSITION_TOL = 0.05


def gaussian_replay(rate: float = 0.05) -> dict:
    """Fit a noiseless exp(-(R t)^2) curve and compare R."""
    times = np.linspace(0, 100, 201)
    fit = fit_gaussian_decay(times, np.exp(-((rate * times) ** 2)))
    return dict(expected=rate, recovered=fit.rate, passed=bool(abs(fit.rate - rate) <= RATE_TOL))


def transition_replay(rate: float = 0.01) -> dict:
    times = np.linspace(0, 200, 201)
    fit = fit_transition_rate(times, np.exp(-rate * times))
    return dict(expected=rate, recovered=fit.rate, passed=bool(abs(fit.rate / rate - 1) <= TRANSITION_TOL))


def slope_replay() -> dict:
    """Synthetic R_d = 3 eps and R_E = 5 eps^2 must come back with slopes 1 and 2."""
    eps = np.array([1.0, 2.0, 4.0, 8.0]) * 1e-3
    r_d = loglog_slope(eps, 3 * eps).slope
    r_e = loglog_slope(eps, 5 * eps**2).slope
    return dict(
        r_d_slope=r_d,
        r_e_slope=r_e,
        passed=bool(abs(r_d - 1) <= SLOPE_TOL and abs(r_e - 2) <= SLOPE_TOL),
    )


def self_test(out_dir: Optional[Path] = None, verbose: int = 1) -> dict:
    checks = {
        "gaussian": gaussian_replay(),
        "transition": transition_replay(),
        "slopes": slope_replay(),
    }
    if verbose > 0:
        for name, check in checks.items():
            print("Self-test {}: {}".format(name, "passed" if check["passed"] else "FAILED"))
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        write_json(checks, Path(out_dir) / "selftest.json")
    failed = [name for name, check in checks.items() if not check["passed"]]
    if failed:
        raise NumericalError("Self-test failed: {}".format(", ".join(failed)))
    return checks
