"""Accuracy, bit accounting, throughput, and the system time efficiency metric
eta_T = (time budget - training time) * correct classifications per second."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, replace

import numpy as np

CSV_HEADER = "model,channel,snr_db,seed,n_messages,bits_total,accuracy,t_train_s,u_cps,eta_t,time_budget_s,flags"
_CSV_FIELDS = CSV_HEADER.split(",")

MIN_THROUGHPUT_MESSAGES = 100


def accuracy(pred, truth) -> float:
    """Fraction of equal entries."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size < 1:
        raise ValueError("prediction and truth must be equal-length non-empty vectors")
    return float(np.count_nonzero(pred == truth) / pred.size)


def system_time_efficiency(time_budget_s: float, t_train_s: float, u_cps: float) -> float:
    """(budget - training time) * throughput; negative when training overruns
    the budget (reported as-is and flagged in the CSV)."""
    if not time_budget_s > 0:
        raise ValueError("time_budget_s must be > 0")
    if u_cps < 0:
        raise ValueError("u_cps must be >= 0")
    return (time_budget_s - t_train_s) * u_cps


def measure_throughput(n_correct: int, n_messages: int, elapsed_s: float) -> float:
    """Correct classifications per second over the communication phase
    (assignment/encoding + channel + reconstruction + classification)."""
    if n_messages < MIN_THROUGHPUT_MESSAGES:
        raise ValueError(f"throughput needs >= {MIN_THROUGHPUT_MESSAGES} messages, got {n_messages}")
    if not 0 <= n_correct <= n_messages:
        raise ValueError("n_correct must lie in [0, n_messages]")
    if not elapsed_s > 0:
        raise ValueError("elapsed time is zero; clock resolution too coarse for this run")
    return n_correct / elapsed_s


def deterministic_throughput(n_correct: int, n_messages: int, per_message_s: float) -> float:
    """Throughput under the deterministic cost model: elapsed is
    n_messages * per_message_s instead of wall-clock."""
    if not per_message_s > 0:
        raise ValueError("per_message_s must be > 0")
    return measure_throughput(n_correct, n_messages, n_messages * per_message_s)


@dataclass(frozen=True)
class RunReport:
    """One experiment grid cell. bits_total counts pre-FEC information bits."""

    model: str
    channel: str
    snr_db: float
    seed: int
    n_messages: int
    bits_total: int
    accuracy: float
    t_train_s: float
    u_cps: float
    eta_t: float
    time_budget_s: float
    flags: str = ""

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")
        if self.t_train_s < 0 or self.u_cps < 0:
            raise ValueError("times and throughput must be >= 0")
        if self.eta_t != (self.time_budget_s - self.t_train_s) * self.u_cps:
            raise ValueError("eta_t must equal (time_budget_s - t_train_s) * u_cps exactly")


def make_report(model: str, channel: str, snr_db: float, seed: int, n_messages: int,
                bits_total: int, acc: float, t_train_s: float, u_cps: float,
                time_budget_s: float, flags: str = "") -> RunReport:
    """Assemble a report, computing eta_t and flagging a negative value."""
    eta = system_time_efficiency(time_budget_s, t_train_s, u_cps)
    if eta < 0:
        flags = f"{flags};neg_eta" if flags else "neg_eta"
    return RunReport(model, channel, float(snr_db), int(seed), int(n_messages),
                     int(bits_total), float(acc), float(t_train_s), float(u_cps),
                     float(eta), float(time_budget_s), flags)


def _sanitize_flags(flags: str) -> str:
    return flags.replace(",", ";").replace("\n", " ").replace("\r", " ")


def format_csv_row(report: RunReport) -> str:
    return ",".join([
        report.model,
        report.channel,
        repr(report.snr_db),
        str(report.seed),
        str(report.n_messages),
        str(report.bits_total),
        repr(report.accuracy),
        repr(report.t_train_s),
        repr(report.u_cps),
        repr(report.eta_t),
        repr(report.time_budget_s),
        _sanitize_flags(report.flags),
    ])


def append_report(path, report: RunReport) -> None:
    """Append one CSV row in a single write; the header is created on first use."""
    line = format_csv_row(report) + "\n"
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
        fh.write(line)
        fh.flush()


def read_reports(path) -> list[RunReport]:
    """Parse a results CSV back into reports (floats round-trip exactly)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {header!r}")
        out = []
        for row in reader:
            if len(row) != len(_CSV_FIELDS):
                raise ValueError(f"malformed CSV row {row!r}")
            out.append(RunReport(
                model=row[0], channel=row[1], snr_db=float(row[2]), seed=int(row[3]),
                n_messages=int(row[4]), bits_total=int(row[5]), accuracy=float(row[6]),
                t_train_s=float(row[7]), u_cps=float(row[8]), eta_t=float(row[9]),
                time_budget_s=float(row[10]), flags=row[11]))
        return out


def reports_to_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in reports:
        buf.write(format_csv_row(r) + "\n")
    return buf.getvalue()


def table2_summary(reports: list[RunReport]) -> list[tuple[str, int, float]]:
    """Per-model (bits_total, mean accuracy) aggregate across the grid, in
    first-appearance order."""
    order: list[str] = []
    bits: dict[str, int] = {}
    accs: dict[str, list[float]] = {}
    for r in reports:
        if r.flags.startswith("error"):
            continue
        if r.model not in bits:
            order.append(r.model)
            bits[r.model] = r.bits_total
            accs[r.model] = []
        accs[r.model].append(r.accuracy)
    return [(m, bits[m], float(np.mean(accs[m]))) for m in order]
