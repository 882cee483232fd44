import math
import numpy as np
from functools import reduce
from typing import Optional
from pointerwork.errors import ConfigError
from pointerwork.hilbert import PAULI, HermitianOperator, eig_hermitian
from pointerwork.model import (
    Protocol,
    TotalModel,
    WindowSpec,
    build_bath,
    build_bath_coupling,
)


def system_operator(spec, dim: int, name: str = "system operator") -> HermitianOperator:
    """Turn a config entry into a system-space operator.

    Args:
        spec (dict or list): Either a Pauli-string sum such as {"z": 0.5, "x": 1.0}
            (one letter per qubit, so "zx" acts on two qubits) or an explicit
            nested-list matrix.
        dim (int): Expected system dimension.
        name (str, optional): Used in error messages.
    """
    if isinstance(spec, dict):
        n_qubits = int(round(math.log2(dim))) if dim > 0 else 0
        if 2**n_qubits != dim:
            raise ConfigError("{}: Pauli strings need a power-of-two dim, got {}".format(name, dim))
        m = np.zeros((dim, dim), dtype=complex)
        for label, coeff in spec.items():
            label = str(label).lower()
            if len(label) != n_qubits or any(c not in PAULI for c in label):
                raise ConfigError("{}: bad Pauli string '{}' for {} qubit(s)".format(name, label, n_qubits))
            m += float(coeff) * reduce(np.kron, [PAULI[c] for c in label])
    else:
        try:
            m = np.array(spec, dtype=complex)
        except (TypeError, ValueError) as err:
            raise ConfigError("{}: cannot read matrix ({})".format(name, err))
        if m.shape != (dim, dim):
            raise ConfigError("{}: expected a {}x{} matrix, got shape {}".format(name, dim, dim, m.shape))
    try:
        return HermitianOperator(m)
    except ConfigError as err:
        raise ConfigError("{}: {}".format(name, err))


def bath_dim(model_config: dict) -> int:
    if model_config["bath_type"] == "spin-chain":
        return 2 ** int(model_config["bath_sites"])
    return int(model_config["bath_dim"])


def window(model_config: dict, count: Optional[int] = None) -> WindowSpec:
    count = model_config["window_count"] if count is None else count
    if count is None:
        return WindowSpec.default(bath_dim(model_config))
    return WindowSpec(
        count=int(count),
        center_index=model_config["window_center_index"],
        center_energy=model_config["window_center_energy"],
    )


def protocol(protocol_config: dict, **overrides) -> Protocol:
    kwargs = {k: protocol_config[k] for k in ("t0", "t1", "lambda0", "lambda1", "shape")}
    kwargs.update(overrides)
    return Protocol(
        t0=float(kwargs["t0"]),
        t1=float(kwargs["t1"]),
        lambda0=float(kwargs["lambda0"]),
        lambda1=float(kwargs["lambda1"]),
        shape=kwargs["shape"],
    )


def bath_hamiltonian(model_config: dict, seed: int = 0) -> HermitianOperator:
    return build_bath(
        model_config["bath_type"],
        dim=bath_dim(model_config),
        sites=model_config["bath_sites"],
        scale=float(model_config["bath_scale"]),
        seed=seed,
        j_coupling=float(model_config["j_coupling"]),
        h_x=float(model_config["h_x"]),
        h_z=float(model_config["h_z"]),
    )


def model(
    model_config: dict,
    protocol: Protocol,
    seed: int = 0,
    window_spec: Optional[WindowSpec] = None,
    coupling_scale: Optional[float] = None,
    h_is: Optional[HermitianOperator] = None,
    verbose: int = 1,
) -> TotalModel:
    """Build the TotalModel of one configured (seed, window) realization.

    The bath self-Hamiltonian uses `seed`, the bath coupling factor `seed + 1`.
    """
    dim_s = int(model_config["system_dim"])
    h_s = system_operator(model_config["h_s"], dim_s, "model.h_s")
    if h_is is None:
        h_is = system_operator(model_config["h_is"], dim_s, "model.h_is")
    window_spec = window(model_config) if window_spec is None else window_spec
    scale = model_config["coupling_scale"] if coupling_scale is None else coupling_scale

    if verbose > 0:
        print(
            "Building {} bath of dim {} (seed {}, window {}) ...".format(
                model_config["bath_type"], bath_dim(model_config), seed, window_spec.count
            )
        )
    h_e2 = bath_hamiltonian(model_config, seed)
    spectrum = eig_hermitian(h_e2)
    h_ie2 = build_bath_coupling(
        spectrum,
        window_spec.indices(spectrum.eigenvalues),
        seed=seed + 1,
        offset=float(model_config["ie2_offset"]),
        coupling_scale=float(scale),
    )
    return TotalModel(h_s, h_is, h_e2, h_ie2, window_spec, protocol)
