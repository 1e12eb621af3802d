"""Binary policy serialization: magic "POL1", little-endian float64 arrays."""

from __future__ import annotations

import struct

import numpy as np

from .mlp import Mlp
from .train import A2CPolicy, ActorCriticNet, QPolicy

POLICY_MAGIC = b"POL1"
POLICY_VERSION = 1

_ALGOS = {"dqn": 0, "a2c": 1}
_ALGOS_REV = {v: k for k, v in _ALGOS.items()}
_ENCODERS = {"basic": 0, "with_intents": 1}
_ENCODERS_REV = {v: k for k, v in _ENCODERS.items()}


def _write_array(fh, arr: np.ndarray) -> None:
    arr = np.atleast_2d(np.ascontiguousarray(arr, dtype="<f8"))
    fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
    fh.write(arr.tobytes())


def _read_array(fh) -> np.ndarray:
    rows, cols = struct.unpack("<II", fh.read(8))
    data = np.frombuffer(fh.read(8 * rows * cols), dtype="<f8").reshape(rows, cols)
    return data.copy()


def save_policy(policy, path) -> None:
    if isinstance(policy, QPolicy):
        algo = "dqn"
        arrays = []
        for w, b in zip(policy.net.weights, policy.net.biases):
            arrays.extend([w, b])
        sizes = policy.net.layer_sizes
    elif isinstance(policy, A2CPolicy):
        algo = "a2c"
        net = policy.net
        arrays = []
        for w, b in zip(net.trunk_w, net.trunk_b):
            arrays.extend([w, b])
        arrays.extend([net.policy_w, net.policy_b, net.value_w, net.value_b])
        sizes = [net.trunk_w[0].shape[0]] + [w.shape[1] for w in net.trunk_w] + [
            net.policy_w.shape[1]
        ]
    else:
        raise TypeError(f"cannot serialize policy of type {type(policy).__name__}")

    with open(path, "wb") as fh:
        fh.write(POLICY_MAGIC)
        fh.write(
            struct.pack(
                "<IBBI",
                POLICY_VERSION,
                _ALGOS[algo],
                _ENCODERS[policy.encoder_kind],
                len(sizes),
            )
        )
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        fh.write(struct.pack("<I", len(arrays)))
        for arr in arrays:
            _write_array(fh, arr)


def load_policy(path):
    with open(path, "rb") as fh:
        if fh.read(4) != POLICY_MAGIC:
            raise ValueError(f"{path}: bad magic, not a policy file")
        version, algo_code, enc_code, n_sizes = struct.unpack("<IBBI", fh.read(10))
        if version != POLICY_VERSION:
            raise ValueError(f"{path}: unsupported policy version {version}")
        sizes = list(struct.unpack(f"<{n_sizes}I", fh.read(4 * n_sizes)))
        (n_arrays,) = struct.unpack("<I", fh.read(4))
        arrays = [_read_array(fh) for _ in range(n_arrays)]

    algo = _ALGOS_REV[algo_code]
    encoder_kind = _ENCODERS_REV[enc_code]
    if algo == "dqn":
        net = Mlp.__new__(Mlp)
        net.layer_sizes = sizes
        net.weights = [arrays[2 * i] for i in range(len(sizes) - 1)]
        net.biases = [arrays[2 * i + 1].ravel() for i in range(len(sizes) - 1)]
        return QPolicy(net, encoder_kind)

    hidden = sizes[1:-1]
    net = ActorCriticNet.__new__(ActorCriticNet)
    n_trunk = len(hidden)
    net.trunk_w = [arrays[2 * i] for i in range(n_trunk)]
    net.trunk_b = [arrays[2 * i + 1].ravel() for i in range(n_trunk)]
    net.policy_w = arrays[2 * n_trunk]
    net.policy_b = arrays[2 * n_trunk + 1].ravel()
    net.value_w = arrays[2 * n_trunk + 2]
    net.value_b = arrays[2 * n_trunk + 3].ravel()
    return A2CPolicy(net, encoder_kind)
