"""Experiment configuration: line-oriented `key = value` files with `#`
comments. Unknown keys are rejected; defaults follow the published training
hyperparameters (batch 128, Adam 0.9/0.999, classifier 15 epochs at lr 0.001
with gamma 0.75, autoencoder gamma 0.97)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

MODELS = ("sem_quan", "sem_comp", "vqae", "huffman_baseline")
CHANNELS = ("awgn", "rayleigh_inverted")

# Documented presets mirroring the two reference experiment regimes: a text-like
# run (10000-point codebook, 4 classes, latent 64) and an image-like run with
# scarce codebook data (1000 points, 10 classes, latent 16).
PRESETS = {
    "agnews-like": {
        "synthetic": True,
        "synthetic_classes": 4,
        "synthetic_codebook_per_class": 2500,
        "synthetic_test_per_class": 500,
        "synthetic_train_per_class": 2500,
        "vqae_epochs": 30,
        "vqae_initial_lr": 0.005,
        "vqae_latent_dim": 64,
    },
    "stl10-like": {
        "synthetic": True,
        "synthetic_classes": 10,
        "synthetic_codebook_per_class": 100,
        "synthetic_test_per_class": 200,
        "synthetic_train_per_class": 1000,
        "vqae_epochs": 50,
        "vqae_initial_lr": 0.01,
        "vqae_latent_dim": 16,
    },
}


@dataclass
class ExperimentConfig:
    # data source: either three dataset paths or the synthetic generator
    train_path: str | None = None
    codebook_path: str | None = None
    test_path: str | None = None
    synthetic: bool = False
    synthetic_classes: int = 4
    synthetic_dim: int = 64
    synthetic_spread: float = 0.05
    synthetic_train_per_class: int = 250
    synthetic_codebook_per_class: int = 250
    synthetic_test_per_class: int = 125

    models: list[str] = field(default_factory=list)
    channels: list[str] = field(default_factory=lambda: ["awgn"])
    snr_db: list[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0])
    seeds: list[int] = field(default_factory=lambda: [1])
    time_budget_s: float = 100.0

    deterministic_time: bool = False
    det_per_message_s: float = 0.001
    det_per_train_example_s: float = 1e-5
    det_per_ap_update_s: float = 1e-9

    inversion_clip: float = 0.0

    batch_size: int = 128
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999

    clf_epochs: int = 15
    clf_initial_lr: float = 0.001
    clf_gamma: float = 0.75

    ap_damping: float = 0.5
    ap_max_iterations: int = 1000
    ap_convergence_window: int = 50
    ap_preference: float | str = "median"

    vqae_alpha: int = 4
    vqae_latent_dim: int = 16
    vqae_codebook_size: int | str = "ap"
    vqae_beta: float = 0.25
    vqae_epochs: int = 30
    vqae_initial_lr: float = 0.01
    vqae_gamma: float = 0.97

    baseline_train_text: str | None = None
    baseline_test_text: str | None = None


class ConfigError(ValueError):
    """Configuration problem; names the key and line when known."""


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def _parse_list(value: str, conv):
    items = [v.strip() for v in value.split(",") if v.strip()]
    if not items:
        raise ValueError("list must be non-empty")
    return [conv(v) for v in items]


_PARSERS = {
    "train_path": str,
    "codebook_path": str,
    "test_path": str,
    "synthetic": _parse_bool,
    "synthetic_classes": int,
    "synthetic_dim": int,
    "synthetic_spread": float,
    "synthetic_train_per_class": int,
    "synthetic_codebook_per_class": int,
    "synthetic_test_per_class": int,
    "models": lambda v: _parse_list(v, str),
    "channels": lambda v: _parse_list(v, str),
    "snr_db": lambda v: _parse_list(v, float),
    "seeds": lambda v: _parse_list(v, int),
    "time_budget_s": float,
    "deterministic_time": _parse_bool,
    "det_per_message_s": float,
    "det_per_train_example_s": float,
    "det_per_ap_update_s": float,
    "inversion_clip": float,
    "batch_size": int,
    "adam_beta1": float,
    "adam_beta2": float,
    "clf_epochs": int,
    "clf_initial_lr": float,
    "clf_gamma": float,
    "ap_damping": float,
    "ap_max_iterations": int,
    "ap_convergence_window": int,
    "ap_preference": lambda v: v if v == "median" else float(v),
    "vqae_alpha": int,
    "vqae_latent_dim": int,
    "vqae_codebook_size": lambda v: v if v == "ap" else int(v),
    "vqae_beta": float,
    "vqae_epochs": int,
    "vqae_initial_lr": float,
    "vqae_gamma": float,
    "baseline_train_text": str,
    "baseline_test_text": str,
}


def parse_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment config file."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    entries: list[tuple[int, str, str]] = []
    preset_name = None
    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            if value not in PRESETS:
                raise ConfigError(f"line {ln}: unknown preset {value!r} (available: {', '.join(PRESETS)})")
            preset_name = value
            continue
        if key not in _PARSERS:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        entries.append((ln, key, value))

    cfg = ExperimentConfig()
    if preset_name:
        cfg = replace(cfg, **PRESETS[preset_name])
    for ln, key, value in entries:
        try:
            parsed = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {ln}: bad value for {key!r}: {exc}") from None
        cfg = replace(cfg, **{key: parsed})
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    if not cfg.models:
        raise ConfigError("missing required key 'models'")
    for m in cfg.models:
        if m not in MODELS:
            raise ConfigError(f"unknown model {m!r} (available: {', '.join(MODELS)})")
    for c in cfg.channels:
        if c not in CHANNELS:
            raise ConfigError(f"unknown channel {c!r} (available: {', '.join(CHANNELS)})")
    if not cfg.snr_db or not cfg.seeds or not cfg.channels:
        raise ConfigError("channels, snr_db and seeds must be non-empty")
    if cfg.synthetic:
        if cfg.synthetic_classes < 2 or cfg.synthetic_dim < 2:
            raise ConfigError("synthetic data needs >= 2 classes and dimension >= 2")
        if min(cfg.synthetic_train_per_class, cfg.synthetic_codebook_per_class,
               cfg.synthetic_test_per_class) < 1:
            raise ConfigError("synthetic per-class split sizes must be >= 1")
    else:
        for key in ("train_path", "codebook_path", "test_path"):
            value = getattr(cfg, key)
            if value is None:
                raise ConfigError(f"missing required key {key!r} (or set synthetic = true)")
            if not os.path.exists(value):
                raise ConfigError(f"{key} does not exist: {value}")
    if "huffman_baseline" in cfg.models:
        for key in ("baseline_train_text", "baseline_test_text"):
            value = getattr(cfg, key)
            if value is None:
                raise ConfigError(f"model huffman_baseline requires {key}")
            if not os.path.exists(value):
                raise ConfigError(f"{key} does not exist: {value}")
    if not cfg.time_budget_s > 0:
        raise ConfigError("time_budget_s must be > 0")
    if not 0.5 <= cfg.ap_damping < 1:
        raise ConfigError("ap_damping must lie in [0.5, 1)")
    if cfg.vqae_alpha < 2:
        raise ConfigError("vqae_alpha must be >= 2")
    if isinstance(cfg.vqae_codebook_size, int) and cfg.vqae_codebook_size < 1:
        raise ConfigError("vqae_codebook_size must be >= 1 or 'ap'")
