import copy
import math
import yaml
from pathlib import Path
from typing import Optional
from pointerwork.errors import ConfigError
from pointerwork.params.param_keys import BATH_STATES, BATH_TYPES, OUTPUT_FORMATS, PARAM_KEYS
from pointerwork.model import SHAPES

MIN_STATS_WINDOW = 16
TEXT_KEYS = {
    ("model", "bath_type"),
    ("model", "bath_state"),
    ("protocol", "shape"),
    ("output", "directory"),
    ("output", "formats"),
    ("output", "wandb_project"),
}


def load(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("Config file {} not found".format(path))
    try:
        with open(path, "r") as f:
            raw = yaml.safe_load(f)
    except yaml.YAMLError as err:
        raise ConfigError("Config file {} is not valid YAML: {}".format(path, err))
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("Config file {} must hold a mapping of blocks".format(path))
    return raw


def _numeric(value):
    # YAML 1.1 reads "1e-3" as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_numeric(v) for v in value]
    if isinstance(value, dict):
        return {k: _numeric(v) for k, v in value.items()}
    return value


def fill_defaults(raw: dict) -> dict:
    """Every block and key of PARAM_KEYS, raw values taking precedence."""
    unknown = set(raw) - set(PARAM_KEYS)
    if unknown:
        raise ConfigError("Unknown config blocks: {}".format(sorted(unknown)))

    config = {}
    for block, defaults in PARAM_KEYS.items():
        given = raw.get(block) or {}
        if not isinstance(given, dict):
            raise ConfigError("Config block '{}' must be a mapping".format(block))
        extra = set(given) - set(defaults)
        if extra:
            raise ConfigError("Unknown keys in block '{}': {}".format(block, sorted(extra)))
        config[block] = copy.deepcopy(defaults)
        for key, value in given.items():
            config[block][key] = copy.deepcopy(value if (block, key) in TEXT_KEYS else _numeric(value))
    return config


def apply_overrides(config: dict, overrides: Optional[dict] = None) -> dict:
    """Apply {"block.key": value} overrides, e.g. from the command line."""
    for dotted, value in (overrides or {}).items():
        block, key = dotted.split(".", 1)
        if block not in config or key not in config[block]:
            raise ConfigError("Cannot override unknown key {}".format(dotted))
        config[block][key] = value
    return config


def _positive(value, name):
    try:
        ok = value is not None and math.isfinite(float(value)) and float(value) > 0
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise ConfigError("{} must be a positive number, got {!r}".format(name, value))


def _fraction(value, name):
    _positive(value, name)
    if not float(value) < 1:
        raise ConfigError("{} must lie in (0, 1), got {}".format(name, value))


def validate(config: dict) -> dict:
    """Reject inconsistent configs before anything is computed."""
    from pointerwork.get.model import bath_dim, system_operator

    m = config["model"]
    if m["bath_type"] not in BATH_TYPES:
        raise ConfigError("model.bath_type must be one of {}, got {}".format(BATH_TYPES, m["bath_type"]))
    if m["bath_state"] not in BATH_STATES:
        raise ConfigError("model.bath_state must be one of {}, got {}".format(BATH_STATES, m["bath_state"]))
    if not isinstance(m["system_dim"], int) or m["system_dim"] < 2:
        raise ConfigError("model.system_dim must be an integer >= 2, got {!r}".format(m["system_dim"]))
    system_operator(m["h_s"], m["system_dim"], "model.h_s")
    system_operator(m["h_is"], m["system_dim"], "model.h_is")
    if m["bath_type"] == "spin-chain":
        if not isinstance(m["bath_sites"], int) or not 2 <= m["bath_sites"] <= 12:
            raise ConfigError("model.bath_sites must be an integer in [2, 12], got {!r}".format(m["bath_sites"]))
    elif not isinstance(m["bath_dim"], int) or m["bath_dim"] < 2:
        raise ConfigError("model.bath_dim must be an integer >= 2, got {!r}".format(m["bath_dim"]))
    n_e = bath_dim(m)
    count = m["window_count"] if m["window_count"] is not None else max(1, n_e // 4)
    if not MIN_STATS_WINDOW <= count <= n_e:
        raise ConfigError(
            "Window of {} states must hold between {} and the bath dim {}".format(count, MIN_STATS_WINDOW, n_e)
        )
    if m["window_center_index"] is not None and m["window_center_energy"] is not None:
        raise ConfigError("Give model.window_center_index or model.window_center_energy, not both")
    _positive(m["bath_scale"], "model.bath_scale")
    _positive(m["coupling_scale"], "model.coupling_scale")
    if m["bath_state_width"] is not None:
        _positive(m["bath_state_width"], "model.bath_state_width")

    p = config["protocol"]
    if p["shape"] not in SHAPES:
        raise ConfigError("protocol.shape must be one of {}, got {}".format(SHAPES, p["shape"]))
    if not float(p["t1"]) > float(p["t0"]):
        raise ConfigError("protocol needs t1 > t0, got [{}, {}]".format(p["t0"], p["t1"]))
    if p["shape"] == "constant" and p["lambda0"] != p["lambda1"]:
        raise ConfigError("A constant protocol needs lambda1 == lambda0")

    s = config["sweep"]
    if s["epsilons"] is not None:
        for eps in s["epsilons"]:
            _positive(eps, "sweep.epsilons entry")
    for factor in s["epsilon_p_factors"] or []:
        _positive(factor, "sweep.epsilon_p_factors entry")
    _positive(s["decay_factor"], "sweep.decay_factor")
    for ramp in s["ramp_times"]:
        _positive(ramp, "sweep.ramp_times entry")
    if not s["seeds"] or not all(isinstance(seed, int) for seed in s["seeds"]):
        raise ConfigError("sweep.seeds must be a nonempty list of integers")
    for n_w in s["window_counts"]:
        if not isinstance(n_w, int) or n_w < MIN_STATS_WINDOW:
            raise ConfigError("sweep.window_counts entries must be integers >= {}".format(MIN_STATS_WINDOW))
    for name in ("alpha", "beta"):
        if not isinstance(s[name], int) or not 0 <= s[name] < m["system_dim"]:
            raise ConfigError("sweep.{} must be a system level index, got {!r}".format(name, s[name]))
    if s["alpha"] == s["beta"]:
        raise ConfigError("sweep.alpha and sweep.beta must differ")

    n = config["numerics"]
    if not isinstance(n["n_samples"], int) or n["n_samples"] < 2:
        raise ConfigError("numerics.n_samples must be an integer >= 2")
    if n["dt"] is not None:
        _positive(n["dt"], "numerics.dt")
    if n["dlambda_max"] is None or float(n["dlambda_max"]) < 0:
        raise ConfigError("numerics.dlambda_max must be >= 0")
    for name in ("decay_floor", "no_decay", "max_depletion", "noise_floor", "dos_fraction"):
        _fraction(n[name], "numerics." + name)
    if not isinstance(n["min_fit_points"], int) or n["min_fit_points"] < 3:
        raise ConfigError("numerics.min_fit_points must be an integer >= 3")
    for name in ("decay_time", "transition_time"):
        if n[name] is not None:
            _positive(n[name], "numerics." + name)
    _positive(n["max_time"], "numerics.max_time")

    w = config["work"]
    _positive(w["beta"], "work.beta")
    _positive(w["fast_ramp_time"], "work.fast_ramp_time")
    _fraction(w["transient_fraction"], "work.transient_fraction")

    o = config["output"]
    bad = set(o["formats"]) - set(OUTPUT_FORMATS)
    if bad:
        raise ConfigError("Unknown output formats {}".format(sorted(bad)))
    return config


def config(path, overrides: Optional[dict] = None, dump: bool = True) -> dict:
    """Read, complete and validate a YAML config; dump the resolved result next to the outputs."""
    config = validate(apply_overrides(fill_defaults(load(path)), overrides))

    if config["output"]["directory"] == "current":
        config["output"]["directory"] = str(Path(path).parent) + "/"

    if dump:
        out = Path(config["output"]["directory"])
        if config["output"]["verbose"] > 0:
            print("Saving folder: {}".format(out))
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "run_config.yaml", "w") as f:
            yaml.safe_dump(config, f, sort_keys=True)
    return config
