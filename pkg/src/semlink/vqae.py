"""Learning-based semantic codebook: an alpha-scaled dense autoencoder whose
latent vectors are quantized against a learned codebook.

Training follows the three-term objective
    L = ||Q - Q_hat||^2 + ||sg[z] - e||^2 + beta ||z - sg[e]||^2
with straight-through estimation across the quantizer: the reconstruction
gradient at e is copied to z unchanged, the middle term moves only codebook
entries, and the commitment term moves only the encoder.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Codebook, LabeledDataset, Rng, load_codebook, save_codebook
from .neural import (
    AdamState,
    DenseNet,
    TrainConfig,
    adam_step,
    backward,
    exponential_lr,
    forward,
    init_dense_net,
    load_net,
    minibatch_order,
    save_net,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VqaeConfig:
    alpha: int = 4
    latent_dim: int = 16
    codebook_size: int = 64
    beta: float = 0.25  # commitment weight
    train: TrainConfig = field(default_factory=lambda: TrainConfig(
        batch_size=128, epochs=30, initial_lr=0.01, scheduler_gamma=0.97))

    def __post_init__(self):
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.codebook_size < 1:
            raise ValueError("codebook_size must be >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")


@dataclass
class VqaeModel:
    encoder: DenseNet  # p -> ... -> K
    decoder: DenseNet  # K -> ... -> p, transposed widths
    codebook: np.ndarray  # (codebook_size, K) float64

    def __post_init__(self):
        self.codebook = np.asarray(self.codebook, dtype=np.float64)
        if self.codebook.ndim != 2 or self.codebook.shape[1] != self.encoder.output_dim:
            raise ValueError("codebook must be (M, K) with K matching the encoder")
        if self.decoder.input_dim != self.encoder.output_dim:
            raise ValueError("decoder input must match the latent dimension")
        if self.decoder.output_dim != self.encoder.input_dim:
            raise ValueError("decoder output must match the embedding dimension")

    @property
    def p(self) -> int:
        return self.encoder.input_dim

    @property
    def latent_dim(self) -> int:
        return self.encoder.output_dim


def plan_architecture(p: int, alpha: int, latent_dim: int) -> list[int]:
    """Encoder widths (input-exclusive): powers alpha^j down to alpha^jt, then
    the latent width, where j is the largest exponent with alpha^j < p and jt
    the smallest with latent_dim < alpha^jt. When j < jt there is no power
    chain and the encoder maps straight to the latent space."""
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    if latent_dim < 1:
        raise ValueError("latent_dim must be >= 1")
    if latent_dim >= p:
        raise ValueError("latent_dim must be < p")
    j = 0
    while alpha ** (j + 1) < p:
        j += 1
    jt = 0
    while alpha**jt <= latent_dim:
        jt += 1
    if j < jt:
        return [latent_dim]
    return [alpha**t for t in range(j, jt - 1, -1)] + [latent_dim]


def _stack_activations(n_layers: int) -> list[str]:
    return ["relu"] * (n_layers - 1) + ["identity"]


def build_vqae(p: int, cfg: VqaeConfig, rng: Rng) -> VqaeModel:
    """Untrained model: planned encoder, transposed decoder, Gaussian codebook.
    train_vqae replaces the codebook with encodings of dataset rows."""
    widths = plan_architecture(p, cfg.alpha, cfg.latent_dim)
    enc_dims = [p] + widths
    dec_dims = [widths[-1]] + widths[-2::-1] + [p]
    encoder = init_dense_net(enc_dims, _stack_activations(len(enc_dims) - 1), rng.substream("encoder"))
    decoder = init_dense_net(dec_dims, _stack_activations(len(dec_dims) - 1), rng.substream("decoder"))
    codebook = rng.substream("codebook").gen.standard_normal((cfg.codebook_size, cfg.latent_dim))
    return VqaeModel(encoder, decoder, codebook)


def encode(model: VqaeModel, q) -> np.ndarray:
    """Deterministic encoder pass; accepts a vector (p,) or batch (B, p)."""
    z, _ = forward(model.encoder, q)
    return z


def decode(model: VqaeModel, e) -> np.ndarray:
    q_hat, _ = forward(model.decoder, e)
    return q_hat


def quantize_latent(codebook: np.ndarray, z) -> tuple[int, np.ndarray]:
    """Nearest codebook row by L2; ties break to the lowest index."""
    cb = np.asarray(codebook, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or cb.ndim != 2 or cb.shape[1] != z.shape[0]:
        raise ValueError("latent dimension does not match the codebook")
    diff = cb - z
    d2 = np.sum(diff * diff, axis=1)
    p = int(np.argmin(d2))
    return p, cb[p]


def quantize_latent_batch(codebook: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized quantize_latent over (B, K) latents -> (indices, entries).
    Bit-identical to the per-sample scan, including tie-breaks."""
    cb = np.asarray(codebook, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or cb.ndim != 2 or cb.shape[1] != z.shape[1]:
        raise ValueError("latent dimension does not match the codebook")
    out = np.empty(z.shape[0], dtype=np.int64)
    chunk = max(1, int(4e6 // max(1, cb.shape[0] * cb.shape[1])))
    for start in range(0, z.shape[0], chunk):
        block = z[start : start + chunk]
        diff = block[:, None, :] - cb[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        out[start : start + block.shape[0]] = np.argmin(d2, axis=1)
    return out, cb[out]


@dataclass(frozen=True)
class VqaeLoss:
    """Eq-style loss terms; commitment is already scaled by beta, so the
    training objective is the plain sum of the three."""

    reconstruction: float
    codebook: float
    commitment: float
    q_hat: np.ndarray

    @property
    def total(self) -> float:
        return self.reconstruction + self.codebook + self.commitment


def vqae_loss(q, model: VqaeModel, beta: float = 0.25) -> VqaeLoss:
    """All three objective terms for one embedding."""
    q = np.asarray(q, dtype=np.float64)
    z = encode(model, q)
    _, e = quantize_latent(model.codebook, z)
    q_hat = decode(model, e)
    d_rec = q - q_hat
    d_lat = z - e
    rec = float(np.sum(d_rec * d_rec))
    lat = float(np.sum(d_lat * d_lat))
    return VqaeLoss(rec, lat, beta * lat, q_hat)


def vqae_batch_step(model: VqaeModel, x: np.ndarray, beta: float):
    """Mean-reduced loss terms and routed gradients for one minibatch.

    Returns (loss_terms, enc_grads, dec_grads, codebook_grad, indices).
    Routing: reconstruction -> decoder normally, encoder via straight-through;
    codebook term -> codebook rows only; commitment -> encoder only.
    """
    b = x.shape[0]
    z, enc_cache = forward(model.encoder, x)
    idx, e = quantize_latent_batch(model.codebook, z)
    q_hat, dec_cache = forward(model.decoder, e)
    d_rec = q_hat - x
    d_lat = z - e
    rec = float(np.sum(d_rec * d_rec) / b)
    lat = float(np.sum(d_lat * d_lat) / b)
    dec_grads, d_e = backward(model.decoder, dec_cache, 2.0 * d_rec / b)
    d_z = d_e + (2.0 * beta / b) * d_lat
    enc_grads, _ = backward(model.encoder, enc_cache, d_z)
    cb_grad = np.zeros_like(model.codebook)
    np.add.at(cb_grad, idx, (2.0 / b) * (e - z))
    return (rec, lat, beta * lat), enc_grads, dec_grads, cb_grad, idx


def train_vqae(ds: LabeledDataset, cfg: VqaeConfig,
               epoch_losses: list | None = None) -> tuple[VqaeModel, float]:
    """Joint minibatch Adam training of encoder, decoder, and codebook.

    The codebook starts from encodings of codebook_size distinct dataset rows
    picked deterministically from the seed (avoids dead codes at small N).
    Returns the model and the wall-clock training time.
    """
    if cfg.latent_dim >= ds.p:
        raise ValueError("latent_dim must be < dataset dimension")
    if cfg.codebook_size > ds.n:
        raise ValueError("codebook_size cannot exceed the dataset size")
    t0 = time.perf_counter()
    rng = Rng(cfg.train.seed)
    model = build_vqae(ds.p, cfg, rng)
    rows = rng.substream("codebook_rows").gen.choice(ds.n, size=cfg.codebook_size, replace=False)
    x_all = ds.embeddings.astype(np.float64)
    model.codebook = np.array(encode(model, x_all[rows]), dtype=np.float64).reshape(cfg.codebook_size, cfg.latent_dim)

    params = model.encoder.params() + model.decoder.params() + [model.codebook]
    state = AdamState.for_params(params)
    n_enc = len(model.encoder.params())
    n_dec = len(model.decoder.params())
    for epoch in range(cfg.train.epochs):
        lr = exponential_lr(cfg.train.initial_lr, cfg.train.scheduler_gamma, epoch)
        batches = minibatch_order(ds.n, cfg.train.batch_size, rng.substream("shuffle", epoch))
        used = np.zeros(cfg.codebook_size, dtype=bool)
        total = 0.0
        for bi, batch_idx in enumerate(batches):
            terms, enc_g, dec_g, cb_g, idx = vqae_batch_step(model, x_all[batch_idx], cfg.beta)
            loss = sum(terms)
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch} batch {bi}")
            used[idx] = True
            total += loss * batch_idx.size
            grads = [g for pair in enc_g for g in pair]
            grads += [g for pair in dec_g for g in pair]
            grads += [cb_g]
            assert len(grads) == n_enc + n_dec + 1
            adam_step(params, grads, state, lr, cfg.train)
        dead = int(cfg.codebook_size - used.sum())
        if dead:
            logger.info("epoch %d: %d of %d codes unused", epoch, dead, cfg.codebook_size)
        if epoch_losses is not None:
            epoch_losses.append(total / ds.n)
    return model, time.perf_counter() - t0


def latent_codebook(model: VqaeModel) -> Codebook:
    """The learned codebook as a Codebook value (entries live in latent space)."""
    return Codebook(model.codebook)


def save_vqae(model: VqaeModel, prefix: str) -> None:
    """Persist as two SNET checkpoints plus the latent codebook in SCBK form."""
    save_net(model.encoder, f"{prefix}.encoder.snet")
    save_net(model.decoder, f"{prefix}.decoder.snet")
    save_codebook(latent_codebook(model), f"{prefix}.codebook.scbk")


def load_vqae(prefix: str) -> VqaeModel:
    encoder = load_net(f"{prefix}.encoder.snet")
    decoder = load_net(f"{prefix}.decoder.snet")
    codebook = load_codebook(f"{prefix}.codebook.scbk")
    return VqaeModel(encoder, decoder, codebook.entries.astype(np.float64))
