"""Learnable building blocks: linear layers, GRU cells, Adam, parameter files.

Initialization is uniform in ±1/sqrt(fan_in) with zero biases, drawn
from the caller's generator in a fixed order so equal seeds give
bitwise-identical parameters.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .diffcore import Tape, Tensor


class NonFiniteGradientError(RuntimeError):
    """A parameter block produced a NaN/inf gradient (training diverged)."""

    def __init__(self, block: str):
        super().__init__(f"non-finite gradient in parameter block {block!r}")
        self.block = block


class ParamFormatError(ValueError):
    """Parameter file is malformed or has an unsupported version."""


@dataclass
class LinearParams:
    W: Tensor
    b: Tensor


@dataclass
class GruParams:
    W_z: Tensor
    W_r: Tensor
    W_h: Tensor
    U_z: Tensor
    U_r: Tensor
    U_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor


def _uniform(rng, n_out, n_in):
    bound = 1.0 / math.sqrt(max(n_in, 1))
    return rng.uniform(-bound, bound, size=(n_out, n_in))


def linear_init(n_in: int, n_out: int, rng) -> LinearParams:
    if n_in < 0 or n_out < 1:
        raise ValueError(f"linear_init: bad sizes in={n_in} out={n_out}")
    return LinearParams(W=Tensor(_uniform(rng, n_out, n_in)),
                        b=Tensor(np.zeros(n_out)))


def gru_init(n_in: int, n_hidden: int, rng) -> GruParams:
    """Draw order: W_z, W_r, W_h, U_z, U_r, U_h (biases are zero)."""
    if n_in < 0 or n_hidden < 1:
        raise ValueError(f"gru_init: bad sizes in={n_in} hidden={n_hidden}")
    W = [Tensor(_uniform(rng, n_hidden, n_in)) for _ in range(3)]
    U = [Tensor(_uniform(rng, n_hidden, n_hidden)) for _ in range(3)]
    b = [Tensor(np.zeros(n_hidden)) for _ in range(3)]
    return GruParams(W[0], W[1], W[2], U[0], U[1], U[2], b[0], b[1], b[2])


def linear_tensors(prefix: str, p: LinearParams):
    return [(prefix + ".W", p.W), (prefix + ".b", p.b)]


def gru_tensors(prefix: str, p: GruParams):
    names = ("W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h")
    return [(f"{prefix}.{n}", getattr(p, n)) for n in names]


def gru_step(tape: Tape, p: GruParams, x: Tensor, h_prev: Tensor) -> Tensor:
    """One GRU update: z/r gates, candidate h, convex combination.

    h' = (1-z) * h_prev + z * tanh(W_h x + U_h (r * h_prev) + b_h)
    with z = sigmoid(W_z x + U_z h_prev + b_z), r likewise.
    """
    return tape.gru(p.W_z, p.W_r, p.W_h, p.U_z, p.U_r, p.U_h,
                    p.b_z, p.b_r, p.b_h, x, h_prev)


class AdamState:
    """Adam over an ordered (name, tensor) list, with global-norm clipping.

    The iteration order is the list order and never changes, so
    updates are reproducible regardless of how parameters were built.
    """

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999,
                 eps=1e-8, clip_norm=5.0):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.t = 0
        self.m = [np.zeros_like(t.values) for _, t in self.params]
        self.v = [np.zeros_like(t.values) for _, t in self.params]


def clip_gradients(named_tensors, clip_norm: float) -> float:
    """Scale all grads so their global 2-norm is at most clip_norm.

    Returns the pre-clip norm; raises if any block is non-finite.
    """
    sq = 0.0
    for name, t in named_tensors:
        if not np.all(np.isfinite(t.grad)):
            raise NonFiniteGradientError(name)
        sq += float(np.dot(t.grad.ravel(), t.grad.ravel()))
    norm = math.sqrt(sq)
    if norm > clip_norm:
        scale = clip_norm / norm
        for _, t in named_tensors:
            t.grad *= scale
    return norm


def adam_step(state: AdamState) -> float:
    """Clip grads to the global-norm budget, apply Adam, zero grads.

    Returns the pre-clip global gradient 2-norm.
    """
    norm = clip_gradients(state.params, state.clip_norm)
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for i, (_, t) in enumerate(state.params):
        g = t.grad
        m = state.m[i]
        v = state.v[i]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        t.values -= state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)
        t.grad[...] = 0.0
    return norm


# -- parameter files ---------------------------------------------------
#
# magic "BONN", u32 LE version, then per tensor:
#   u32 LE name length, UTF-8 name, u32 LE rank, u32 LE dims..., f64 LE values.

MAGIC = b"BONN"
FORMAT_VERSION = 1


def save_params(path, named_tensors) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        for name, t in named_tensors:
            raw = name.encode("utf-8")
            v = t.values if isinstance(t, Tensor) else np.asarray(t, dtype=np.float64)
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", v.ndim))
            for d in v.shape:
                f.write(struct.pack("<I", d))
            f.write(v.astype("<f8", copy=False).tobytes())


def load_params(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise ParamFormatError(f"bad magic {data[:4]!r}")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != FORMAT_VERSION:
        raise ParamFormatError(f"unsupported format version {version}")
    out: dict[str, np.ndarray] = {}
    pos = 8
    try:
        while pos < len(data):
            (nlen,) = struct.unpack_from("<I", data, pos)
            pos += 4
            name = data[pos:pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<I", data, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}I", data, pos)
            pos += 4 * rank
            count = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(data, dtype="<f8", count=count, offset=pos)
            pos += 8 * count
            out[name] = arr.reshape(dims).astype(np.float64)
    except (struct.error, ValueError) as e:
        raise ParamFormatError(f"truncated or corrupt parameter file: {e}") from e
    if pos != len(data):
        raise ParamFormatError("trailing bytes in parameter file")
    return out


def assign_params(named_tensors, loaded: dict[str, np.ndarray]) -> None:
    """Copy loaded arrays into tensors, by name, validating shapes."""
    for name, t in named_tensors:
        if name not in loaded:
            raise ParamFormatError(f"missing parameter block {name!r}")
        arr = loaded[name]
        if arr.shape != t.values.shape:
            raise ParamFormatError(
                f"shape mismatch for {name!r}: file {arr.shape}, model {t.values.shape}")
        t.values[...] = arr
