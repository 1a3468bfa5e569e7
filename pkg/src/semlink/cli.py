"""Command-line front end: generate synthetic data, build codebooks, train the
classifier, run simulation grids, and render report tables."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import affinity, classifier, metrics, quantizer
from .config import ConfigError, parse_config
from .core import FormatError, Rng, generate_synthetic, load_dataset, save_codebook, save_dataset
from .experiment import run_experiment
from .neural import TrainConfig, save_net


def _cmd_gen(args) -> int:
    ds = generate_synthetic(args.classes, args.per_class, args.dim, args.spread, args.seed)
    save_dataset(ds, args.out)
    print(f"wrote {ds.n} x {ds.p} embeddings ({ds.n_class} classes) to {args.out}")
    return 0


def _cmd_codebook(args) -> int:
    ds = load_dataset(args.data)
    if args.method == "identity":
        cb = quantizer.build_identity_codebook(ds)
        report = f"codewords: {cb.m}\nbit width: {quantizer.index_bit_width(cb.m)}\n"
    else:
        cfg = affinity.APConfig(args.damping, args.max_iterations,
                                args.convergence_window,
                                "median" if args.preference == "median" else float(args.preference))
        sim = affinity.similarity_matrix(ds, cfg.preference)
        ap = affinity.affinity_propagation(sim, cfg, Rng(args.seed))
        cb = affinity.build_centroid_codebook(ds, ap)
        report = (affinity.format_ap_report(ap)
                  + f"bit width: {quantizer.index_bit_width(cb.m)}\n")
    save_codebook(cb, args.out)
    print(report, end="")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report)
    print(f"wrote codebook ({cb.m} x {cb.p}) to {args.out}")
    return 0


def _cmd_train_classifier(args) -> int:
    ds = load_dataset(args.train)
    model = classifier.build_classifier(ds.p, ds.n_class, args.seed)
    cfg = TrainConfig(batch_size=args.batch_size, epochs=args.epochs,
                      initial_lr=args.lr, scheduler_gamma=args.gamma, seed=args.seed)
    model, t_train = classifier.train_classifier(model, ds, cfg)
    save_net(model.net, args.out)
    preds = classifier.classify_batch(model, ds.embeddings.astype(np.float64))
    acc = metrics.accuracy(preds, ds.labels)
    print(f"trained in {t_train:.2f}s, train accuracy {acc:.4f}, wrote {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seeds=[args.seed])
    if args.deterministic_time:
        cfg = replace(cfg, deterministic_time=True)
    reports = run_experiment(cfg, csv_path=args.out, jobs=args.jobs)
    failed = [r for r in reports if r.flags.startswith("error")]
    print(f"{len(reports)} grid cells, {len(failed)} failed; results in {args.out}")
    for r in failed:
        print(f"  failed: {r.model}/{r.channel}/snr={r.snr_db}/seed={r.seed}: {r.flags}", file=sys.stderr)
    return 0 if not failed else 1


def _aligned_table(reports) -> str:
    head = metrics.CSV_HEADER.split(",")
    rows = [[r.model, r.channel, f"{r.snr_db:g}", str(r.seed), str(r.n_messages),
             str(r.bits_total), f"{r.accuracy:.4f}", f"{r.t_train_s:.4f}",
             f"{r.u_cps:.2f}", f"{r.eta_t:.2f}", f"{r.time_budget_s:g}", r.flags or "-"]
            for r in reports]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h)
              for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    for row in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def _fig_columns(reports) -> str:
    """Plot-ready eta_T columns: per channel, one block of rows
    (snr_db, mean eta_t per model), models in first-appearance order."""
    models: list[str] = []
    for r in reports:
        if r.model not in models and not r.flags.startswith("error"):
            models.append(r.model)
    channels = sorted({r.channel for r in reports})
    blocks = []
    for ch in channels:
        lines = [f"# channel={ch}", "# snr_db " + " ".join(f"eta_t[{m}]" for m in models)]
        snrs = sorted({r.snr_db for r in reports if r.channel == ch})
        for snr in snrs:
            vals = []
            for m in models:
                cell = [r.eta_t for r in reports
                        if r.channel == ch and r.snr_db == snr and r.model == m
                        and not r.flags.startswith("error")]
                vals.append(f"{np.mean(cell):.6g}" if cell else "nan")
            lines.append(f"{snr:g} " + " ".join(vals))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def _table2_text(reports) -> str:
    rows = metrics.table2_summary(reports)
    lines = [f"{'model':<18} {'bits':>10} {'acc_mean':>9}"]
    for model, bits, acc in rows:
        lines.append(f"{model:<18} {bits:>10d} {acc:>9.4f}")
    return "\n".join(lines) + "\n"


def _cmd_report(args) -> int:
    reports = metrics.read_reports(args.csv)
    if args.format == "table":
        text = _aligned_table(reports)
    elif args.format == "fig":
        text = _fig_columns(reports)
    else:
        text = _table2_text(reports)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semlink",
                                     description="semantic communication link experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic SEMB dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--spread", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("codebook", help="build a codebook from a SEMB dataset")
    p.add_argument("--method", choices=["identity", "ap"], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="also write the text report to this path")
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--preference", default="median")
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--convergence-window", type=int, default=50)
    p.set_defaults(func=_cmd_codebook)

    p = sub.add_parser("train-classifier", help="train the receiver classifier")
    p.add_argument("--train", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--gamma", type=float, default=0.75)
    p.set_defaults(func=_cmd_train_classifier)

    p = sub.add_parser("simulate", help="run an experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--seed", type=int, help="override the config's seed list")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--deterministic-time", action="store_true")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="render a results CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--format", choices=["table", "fig", "table2"], default="table")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
