"""Experiment orchestration: build codebooks/models per seed (timed), run the
communication phase per (model, channel, SNR) cell, and emit RunReport rows.

Training-time accounting: the identity codebook is free by definition, the
compression codebook charges the clustering wall-clock, and the autoencoder
charges its training wall-clock. Classifier training is shared receiver
infrastructure and never counted. Deterministic-time mode swaps wall-clock for
a configured cost model so reruns produce byte-identical CSVs.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import affinity, baseline, classifier, metrics, quantizer, vqae
from .config import ExperimentConfig
from .core import LabeledDataset, Rng, derive_seed, generate_synthetic, load_dataset
from .neural import TrainConfig
from .phy import ChannelConfig, transmit_indices
from .quantizer import index_bit_width


def split_per_class(ds: LabeledDataset, counts: list[int]) -> list[LabeledDataset]:
    """Stratified disjoint splits: from each class, the first counts[0] samples
    go to split 0, the next counts[1] to split 1, and so on."""
    need = sum(counts)
    parts: list[list[np.ndarray]] = [[] for _ in counts]
    for c in range(ds.n_class):
        rows = np.flatnonzero(ds.labels == c)
        if rows.size < need:
            raise ValueError(f"class {c} has {rows.size} samples, need {need}")
        offset = 0
        for si, cnt in enumerate(counts):
            parts[si].append(rows[offset : offset + cnt])
            offset += cnt
    out = []
    for rows_per_class in parts:
        rows = np.concatenate(rows_per_class)
        out.append(LabeledDataset(ds.embeddings[rows], ds.labels[rows], ds.n_class))
    return out


@dataclass
class _SeedContext:
    seed: int
    ds_train: LabeledDataset
    ds_code: LabeledDataset
    ds_test: LabeledDataset
    clf: classifier.ClassifierModel
    baseline_train: list[str] | None = None
    baseline_test: list[str] | None = None
    ap_cache: tuple[affinity.APResult, float] | None = None


@dataclass
class _Built:
    """One built model for a seed, with its accounted construction time."""

    model: str
    t_train: float
    codebook: object = None
    vq: object = None
    table: object = None


def _prepare_seed(cfg: ExperimentConfig, seed: int,
                  file_data: tuple | None) -> _SeedContext:
    if cfg.synthetic:
        per_total = (cfg.synthetic_train_per_class + cfg.synthetic_codebook_per_class
                     + cfg.synthetic_test_per_class)
        base = generate_synthetic(cfg.synthetic_classes, per_total, cfg.synthetic_dim,
                                  cfg.synthetic_spread, derive_seed(seed, "data"))
        ds_train, ds_code, ds_test = split_per_class(base, [
            cfg.synthetic_train_per_class,
            cfg.synthetic_codebook_per_class,
            cfg.synthetic_test_per_class,
        ])
    else:
        ds_train, ds_code, ds_test = file_data
    clf = classifier.build_classifier(ds_train.p, ds_train.n_class, derive_seed(seed, "clf_init"))
    train_cfg = TrainConfig(batch_size=cfg.batch_size, epochs=cfg.clf_epochs,
                            initial_lr=cfg.clf_initial_lr, scheduler_gamma=cfg.clf_gamma,
                            adam_beta1=cfg.adam_beta1, adam_beta2=cfg.adam_beta2,
                            seed=derive_seed(seed, "clf_train"))
    classifier.train_classifier(clf, ds_train, train_cfg)
    ctx = _SeedContext(seed, ds_train, ds_code, ds_test, clf)
    if "huffman_baseline" in cfg.models:
        ctx.baseline_train = _read_lines(cfg.baseline_train_text)
        ctx.baseline_test = _read_lines(cfg.baseline_test_text)
    return ctx


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines:
        raise ValueError(f"text corpus {path} is empty")
    return lines


def _run_ap(cfg: ExperimentConfig, ctx: _SeedContext) -> tuple[affinity.APResult, float]:
    """Cluster the codebook dataset once per seed; wall-clock is cached with
    the result so whichever model needs it first does not distort accounting."""
    if ctx.ap_cache is None:
        ap_cfg = affinity.APConfig(cfg.ap_damping, cfg.ap_max_iterations,
                                   cfg.ap_convergence_window, cfg.ap_preference)
        t0 = time.perf_counter()
        sim = affinity.similarity_matrix(ctx.ds_code, cfg.ap_preference)
        result = affinity.affinity_propagation(sim, ap_cfg, Rng(derive_seed(ctx.seed, "ap")))
        ctx.ap_cache = (result, time.perf_counter() - t0)
    return ctx.ap_cache


def _build_model(cfg: ExperimentConfig, ctx: _SeedContext, model: str) -> _Built:
    if model == "sem_quan":
        cb = quantizer.build_identity_codebook(ctx.ds_code)
        return _Built(model, 0.0, codebook=cb)
    if model == "sem_comp":
        ap, elapsed = _run_ap(cfg, ctx)
        t0 = time.perf_counter()
        cb = affinity.build_centroid_codebook(ctx.ds_code, ap)
        t_train = elapsed + (time.perf_counter() - t0)
        if cfg.deterministic_time:
            t_train = ap.iterations_run * ctx.ds_code.n**2 * cfg.det_per_ap_update_s
        return _Built(model, t_train, codebook=cb)
    if model == "vqae":
        size = cfg.vqae_codebook_size
        if size == "ap":
            size = _run_ap(cfg, ctx)[0].k
        vq_cfg = vqae.VqaeConfig(
            alpha=cfg.vqae_alpha, latent_dim=cfg.vqae_latent_dim, codebook_size=size,
            beta=cfg.vqae_beta,
            train=TrainConfig(batch_size=cfg.batch_size, epochs=cfg.vqae_epochs,
                              initial_lr=cfg.vqae_initial_lr, scheduler_gamma=cfg.vqae_gamma,
                              adam_beta1=cfg.adam_beta1, adam_beta2=cfg.adam_beta2,
                              seed=derive_seed(ctx.seed, "vqae")))
        model_obj, t_train = vqae.train_vqae(ctx.ds_code, vq_cfg)
        if cfg.deterministic_time:
            t_train = cfg.vqae_epochs * ctx.ds_code.n * cfg.det_per_train_example_s
        return _Built(model, t_train, vq=model_obj)
    if model == "huffman_baseline":
        t0 = time.perf_counter()
        table = baseline.build_huffman(ctx.baseline_train)
        t_train = time.perf_counter() - t0
        if cfg.deterministic_time:
            t_train = len(ctx.baseline_train) * cfg.det_per_train_example_s
        return _Built(model, t_train, table=table)
    raise ValueError(f"unknown model {model!r}")


def _comm_phase(cfg: ExperimentConfig, ctx: _SeedContext, built: _Built,
                channel_kind: str, snr_db: float) -> metrics.RunReport:
    test = ctx.ds_test
    truth = test.labels
    ch_cfg = ChannelConfig(channel_kind, snr_db,
                           derive_seed(ctx.seed, built.model, channel_kind, repr(float(snr_db))),
                           cfg.inversion_clip)
    t0 = time.perf_counter()
    if built.model in ("sem_quan", "sem_comp"):
        cb = built.codebook
        width = index_bit_width(cb.m)
        indices = quantizer.assign_indices(cb, test.embeddings)
        rx_idx, _link = transmit_indices(indices, width, ch_cfg)
        q_hat = quantizer.reconstruct_received(cb, rx_idx)
        preds = classifier.classify_batch(ctx.clf, q_hat)
        bits_total = test.n * width
    elif built.model == "vqae":
        vq = built.vq
        width = index_bit_width(vq.codebook.shape[0])
        z = vqae.encode(vq, test.embeddings.astype(np.float64))
        indices, _ = vqae.quantize_latent_batch(vq.codebook, z)
        rx_idx, _link = transmit_indices(indices, width, ch_cfg)
        e_rx = vq.codebook[np.minimum(rx_idx, vq.codebook.shape[0] - 1)]
        q_hat = vqae.decode(vq, e_rx)
        preds = classifier.classify_batch(ctx.clf, q_hat)
        bits_total = test.n * width
    elif built.model == "huffman_baseline":
        # lossless source coding: the receiver classifies exact embeddings
        bits_total = 0
        for line in ctx.baseline_test:
            bits = baseline.huffman_encode(built.table, line)
            bits_total += int(bits.size)
            if baseline.huffman_decode(built.table, bits) != line:
                raise ValueError("huffman round trip failed")
        preds = classifier.classify_batch(ctx.clf, test.embeddings.astype(np.float64))
    else:
        raise ValueError(f"unknown model {built.model!r}")
    elapsed = time.perf_counter() - t0
    n_correct = int(np.count_nonzero(preds == truth))
    acc = n_correct / test.n
    if cfg.deterministic_time:
        u = metrics.deterministic_throughput(n_correct, test.n, cfg.det_per_message_s)
    else:
        u = metrics.measure_throughput(n_correct, test.n, elapsed)
    return metrics.make_report(built.model, channel_kind, snr_db, ctx.seed, test.n,
                               bits_total, acc, built.t_train, u, cfg.time_budget_s)


def _error_report(cfg: ExperimentConfig, model: str, channel_kind: str, snr_db: float,
                  seed: int, exc: Exception) -> metrics.RunReport:
    flag = f"error:{type(exc).__name__}:{exc}"
    return metrics.make_report(model, channel_kind, snr_db, seed, 0, 0, 0.0, 0.0, 0.0,
                               cfg.time_budget_s, flag)


def run_experiment(cfg: ExperimentConfig, csv_path=None, jobs: int = 1) -> list[metrics.RunReport]:
    """Run the full (model x channel x snr x seed) grid. Cell failures become
    flagged rows; the grid always completes. Returns reports in grid order."""
    file_data = None
    if not cfg.synthetic:
        file_data = (load_dataset(cfg.train_path), load_dataset(cfg.codebook_path),
                     load_dataset(cfg.test_path))

    lock = threading.Lock()
    reports: dict[tuple, metrics.RunReport] = {}
    cells = [(seed, model, ch, snr) for seed in cfg.seeds for model in cfg.models
             for ch in cfg.channels for snr in cfg.snr_db]

    def emit(key, report: metrics.RunReport) -> None:
        with lock:
            reports[key] = report
            if csv_path is not None:
                metrics.append_report(csv_path, report)

    for seed in cfg.seeds:
        try:
            ctx = _prepare_seed(cfg, seed, file_data)
        except Exception as exc:  # noqa: BLE001 - the grid must survive any cell failure
            for key in [c for c in cells if c[0] == seed]:
                emit(key, _error_report(cfg, key[1], key[2], key[3], seed, exc))
            continue
        for model in cfg.models:
            try:
                built = _build_model(cfg, ctx, model)
            except Exception as exc:  # noqa: BLE001
                for ch in cfg.channels:
                    for snr in cfg.snr_db:
                        emit((seed, model, ch, snr), _error_report(cfg, model, ch, snr, seed, exc))
                continue

            def run_cell(ch, snr, ctx=ctx, built=built, seed=seed, model=model):
                try:
                    report = _comm_phase(cfg, ctx, built, ch, snr)
                except Exception as exc:  # noqa: BLE001
                    report = _error_report(cfg, model, ch, snr, seed, exc)
                emit((seed, model, ch, snr), report)

            pairs = [(ch, snr) for ch in cfg.channels for snr in cfg.snr_db]
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    list(pool.map(lambda p: run_cell(*p), pairs))
            else:
                for ch, snr in pairs:
                    run_cell(ch, snr)

    ordered = [reports[key] for key in cells if key in reports]
    if csv_path is not None:
        _write_table2(csv_path, ordered)
    return ordered


def _write_table2(csv_path, reports: list[metrics.RunReport]) -> None:
    rows = metrics.table2_summary(reports)
    lines = [f"{'model':<18} {'bits':>10} {'acc_mean':>9}"]
    for model, bits, acc in rows:
        lines.append(f"{model:<18} {bits:>10d} {acc:>9.4f}")
    with open(f"{csv_path}.table2.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
