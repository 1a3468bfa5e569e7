"""Receiver-side classification of reconstructed embeddings: a fixed shallow
dense net (hidden widths 128 and 32) trained on clean embeddings."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import LabeledDataset, Rng
from .neural import (
    AdamState,
    DenseNet,
    TrainConfig,
    adam_step,
    backward,
    exponential_lr,
    forward,
    init_dense_net,
    minibatch_order,
    softmax_cross_entropy_batch,
)

HIDDEN_WIDTHS = (128, 32)


@dataclass
class ClassifierModel:
    net: DenseNet
    p: int
    n_class: int


def build_classifier(p: int, n_class: int, seed: int) -> ClassifierModel:
    """p -> 128 (relu) -> 32 (relu) -> n_class (logits)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if n_class < 2:
        raise ValueError("n_class must be >= 2")
    dims = [p, *HIDDEN_WIDTHS, n_class]
    net = init_dense_net(dims, ["relu", "relu", "identity"], Rng(seed).substream("classifier"))
    return ClassifierModel(net, p, n_class)


def train_classifier(model: ClassifierModel, ds_train: LabeledDataset,
                     cfg: TrainConfig) -> tuple[ClassifierModel, float]:
    """Softmax cross-entropy minibatch training on clean embeddings; the model
    is updated in place and the wall-clock training time returned."""
    if ds_train.p != model.p:
        raise ValueError("dataset dimension does not match the classifier")
    if ds_train.labels.max() >= model.n_class:
        raise ValueError("dataset labels exceed the classifier's class count")
    t0 = time.perf_counter()
    rng = Rng(cfg.seed)
    params = model.net.params()
    state = AdamState.for_params(params)
    x_all = ds_train.embeddings.astype(np.float64)
    y_all = ds_train.labels
    for epoch in range(cfg.epochs):
        lr = exponential_lr(cfg.initial_lr, cfg.scheduler_gamma, epoch)
        for bi, idx in enumerate(minibatch_order(ds_train.n, cfg.batch_size, rng.substream("shuffle", epoch))):
            logits, cache = forward(model.net, x_all[idx])
            loss, dlogits = softmax_cross_entropy_batch(logits, y_all[idx])
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch} batch {bi}")
            grads, _ = backward(model.net, cache, dlogits)
            adam_step(params, [g for pair in grads for g in pair], state, lr, cfg)
    return model, time.perf_counter() - t0


def classify(model: ClassifierModel, q_hat) -> int:
    """Argmax over logits; ties break to the lowest class index."""
    logits, _ = forward(model.net, np.asarray(q_hat, dtype=np.float64))
    if logits.ndim != 1:
        raise ValueError("classify takes a single embedding; use classify_batch")
    return int(np.argmax(logits))


def classify_batch(model: ClassifierModel, x: np.ndarray) -> np.ndarray:
    """Vectorized classify over the rows of an (n, p) matrix."""
    logits, _ = forward(model.net, np.asarray(x, dtype=np.float64))
    return np.argmax(logits, axis=1)
