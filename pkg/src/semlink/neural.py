"""Minimal dense-network engine: affine+activation chains, exact reverse-mode
gradients, Adam with bias correction, exponential LR decay, and the SNET
checkpoint format. Parameters live in float64; checkpoints store float32.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import FormatError, Rng

ACTIVATIONS = ("identity", "relu")
NET_MAGIC = b"SNET"
_NET_HEADER = struct.Struct("<4sBB")
_LAYER_HEADER = struct.Struct("<BII")


@dataclass
class DenseLayer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise ValueError("weight must be (out, in) with a matching bias vector")


@dataclass
class DenseNet:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.w.shape[1] != prev.w.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")

    @property
    def input_dim(self) -> int:
        return self.layers[0].w.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].w.shape[0]

    def params(self) -> list[np.ndarray]:
        """Flat parameter list [w0, b0, w1, b1, ...]; views, not copies."""
        out = []
        for layer in self.layers:
            out.append(layer.w)
            out.append(layer.b)
        return out


def init_dense_net(dims: list[int], activations: list[str], rng: Rng) -> DenseNet:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, from the rng."""
    if len(dims) < 2 or len(activations) != len(dims) - 1:
        raise ValueError("need dims [in, h1, ..., out] and one activation per layer")
    gen = rng.gen
    layers = []
    for fan_in, fan_out, act in zip(dims, dims[1:], activations):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = gen.uniform(-bound, bound, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return DenseNet(layers)


def forward(net: DenseNet, x) -> tuple[np.ndarray, list]:
    """Run the network on a vector (p,) or batch (B, p); returns (y, cache)."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ValueError(f"input shape {x.shape} does not match input dim {net.input_dim}")
    cache = []
    h = x
    for layer in net.layers:
        z = h @ layer.w.T + layer.b
        cache.append((h, z))
        h = np.maximum(z, 0.0) if layer.activation == "relu" else z
    y = h[0] if squeeze else h
    return y, cache


def backward(net: DenseNet, cache: list, dl_dy) -> tuple[list, np.ndarray]:
    """Exact gradients for the cached forward pass.

    Returns ([(dw, db), ...] per layer, dl_dx). Parameter gradients sum over
    the batch; callers scale dl_dy for mean reductions. relu uses subgradient
    0 at exactly 0.
    """
    if len(cache) != len(net.layers):
        raise ValueError("cache does not match this network")
    dl = np.asarray(dl_dy, dtype=np.float64)
    squeeze = dl.ndim == 1
    if squeeze:
        dl = dl[None, :]
    if dl.shape[1] != net.output_dim:
        raise ValueError("gradient shape does not match network output")
    if dl.shape[0] != cache[-1][1].shape[0]:
        raise ValueError("cache batch size does not match gradient")
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    for li in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[li]
        h_in, z = cache[li]
        if h_in.shape[1] != layer.w.shape[1]:
            raise ValueError("cache does not match this network")
        dz = dl * (z > 0.0) if layer.activation == "relu" else dl
        grads[li] = (dz.T @ h_in, dz.sum(axis=0))
        dl = dz @ layer.w
    return grads, (dl[0] if squeeze else dl)


@dataclass
class TrainConfig:
    """Minibatch training hyperparameters (classifier defaults)."""

    batch_size: int = 128
    epochs: int = 15
    initial_lr: float = 0.001
    scheduler_gamma: float = 0.75
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.initial_lr > 0:
            raise ValueError("initial_lr must be > 0")
        if not 0 < self.scheduler_gamma <= 1:
            raise ValueError("scheduler_gamma must be in (0, 1]")


@dataclass
class AdamState:
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params: list[np.ndarray]) -> "AdamState":
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState,
              lr: float, cfg: TrainConfig) -> None:
    """Canonical Adam update with bias correction, in place."""
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ValueError("params, grads and state must align")
    state.step += 1
    t = state.step
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def exponential_lr(initial_lr: float, gamma: float, epoch: int) -> float:
    """Learning rate after `epoch` whole epochs: initial * gamma^epoch."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return initial_lr * gamma**epoch


def softmax_cross_entropy(logits, label: int) -> tuple[float, np.ndarray]:
    """Stable log-sum-exp cross entropy for one sample; gradient is
    softmax(logits) - onehot(label)."""
    z = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < z.shape[-1]:
        raise ValueError("label out of range")
    zmax = z.max()
    exps = np.exp(z - zmax)
    total = exps.sum()
    loss = float(np.log(total) + zmax - z[label])
    grad = exps / total
    grad[label] -= 1.0
    return loss, grad


def softmax_cross_entropy_batch(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross entropy over a (B, C) batch; gradient already carries 1/B."""
    z = np.asarray(logits, dtype=np.float64)
    b = z.shape[0]
    zmax = z.max(axis=1, keepdims=True)
    exps = np.exp(z - zmax)
    total = exps.sum(axis=1, keepdims=True)
    rows = np.arange(b)
    losses = np.log(total[:, 0]) + zmax[:, 0] - z[rows, labels]
    grad = exps / total
    grad[rows, labels] -= 1.0
    return float(losses.mean()), grad / b


def mse(a, b) -> tuple[float, np.ndarray]:
    """Squared L2 distortion (sum convention) with gradient 2(a - b)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d * d)), 2.0 * d


def minibatch_order(n: int, batch_size: int, rng: Rng) -> list[np.ndarray]:
    """One shuffled pass split into batches; the last partial batch is kept."""
    order = rng.gen.permutation(n)
    return [order[i : i + batch_size] for i in range(0, n, batch_size)]


def assert_finite_params(net: DenseNet, where: str) -> None:
    for li, layer in enumerate(net.layers):
        if not (np.isfinite(layer.w).all() and np.isfinite(layer.b).all()):
            raise RuntimeError(f"non-finite parameters in layer {li} {where}")


def save_net(net: DenseNet, path) -> None:
    """Write an SNET checkpoint (little-endian, float32 parameters)."""
    if len(net.layers) > 255:
        raise ValueError("SNET supports at most 255 layers")
    with open(path, "wb") as fh:
        fh.write(_NET_HEADER.pack(NET_MAGIC, 1, len(net.layers)))
        for layer in net.layers:
            act = ACTIVATIONS.index(layer.activation)
            out_dim, in_dim = layer.w.shape
            fh.write(_LAYER_HEADER.pack(act, out_dim, in_dim))
            fh.write(layer.w.astype("<f4").tobytes())
            fh.write(layer.b.astype("<f4").tobytes())


def load_net(path) -> DenseNet:
    blob = Path(path).read_bytes()
    if len(blob) < _NET_HEADER.size:
        raise FormatError("header", len(blob), "truncated header")
    magic, version, n_layers = _NET_HEADER.unpack_from(blob)
    if magic != NET_MAGIC:
        raise FormatError("magic", 0, f"bad magic {magic!r}")
    if version != 1:
        raise FormatError("version", 4, f"unsupported version {version}")
    if n_layers < 1:
        raise FormatError("layer_count", 5, "need at least one layer")
    off = _NET_HEADER.size
    layers = []
    for li in range(n_layers):
        if len(blob) < off + _LAYER_HEADER.size:
            raise FormatError(f"layer[{li}]", off, "truncated layer header")
        act, out_dim, in_dim = _LAYER_HEADER.unpack_from(blob, off)
        if act >= len(ACTIVATIONS):
            raise FormatError(f"layer[{li}].activation", off, f"unknown activation code {act}")
        if out_dim < 1 or in_dim < 1:
            raise FormatError(f"layer[{li}].dims", off + 1, "dimensions must be >= 1")
        off += _LAYER_HEADER.size
        need = 4 * out_dim * in_dim + 4 * out_dim
        if len(blob) < off + need:
            raise FormatError(f"layer[{li}].params", len(blob), "truncated parameters")
        w = np.frombuffer(blob, dtype="<f4", count=out_dim * in_dim, offset=off).reshape(out_dim, in_dim)
        off += 4 * out_dim * in_dim
        b = np.frombuffer(blob, dtype="<f4", count=out_dim, offset=off)
        off += 4 * out_dim
        layers.append(DenseLayer(w.astype(np.float64), b.astype(np.float64), ACTIVATIONS[act]))
    if off != len(blob):
        raise FormatError("payload", off, "trailing bytes after payload")
    return DenseNet(layers)
