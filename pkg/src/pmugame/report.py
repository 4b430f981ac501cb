"""File emission for the pipeline: delimited outputs plus rendered figures.

Everything written here is deterministic for a fixed run configuration; no
timestamps, sorted keys, fixed float formatting.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import DetectionReport  # noqa: E402

__all__ = [
    "write_json",
    "write_strategy_csv",
    "write_trace_csv",
    "plot_strategies",
    "plot_convergence",
    "plot_detection_rates",
]


def write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_strategy_csv(path: Path, report: DetectionReport):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["player", "strategy", "probability"])
        for lab, p in report.attacker_table:
            writer.writerow(["attacker", lab, f"{p:.6f}"])
        for lab, p in report.defender_table:
            writer.writerow(["defender", lab, f"{p:.6f}"])
        writer.writerow(["metric", "detection_rate", f"{report.rate:.6f}"])
        writer.writerow(["metric", "naive_detection_rate", f"{report.naive_rate:.6f}"])
        writer.writerow(["metric", "no_defense_rate", f"{report.no_defense_rate:.6f}"])


def write_trace_csv(path: Path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "exploitability", "value_estimate"])
        for t, gap, value in trace:
            writer.writerow([t, f"{gap:.10g}", f"{value:.10g}"])


def _bar(ax, labels, probs, title, color):
    ax.bar(range(len(labels)), probs, color=color)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("probability")
    ax.set_title(title)


def plot_strategies(path: Path, report: DetectionReport, min_prob: float = 1e-3):
    att = [(l, p) for l, p in report.attacker_table if p > min_prob]
    def_ = [(l, p) for l, p in report.defender_table if p > min_prob]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    _bar(ax1, [l for l, _ in att], [p for _, p in att], "attacker mix", "#b4443c")
    _bar(ax2, [f"bus {l}" for l, _ in def_], [p for _, p in def_], "defender mix", "#3c6eb4")
    fig.suptitle(f"equilibrium strategies ({report.scenario})")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def plot_convergence(path: Path, trace, lp_value: float | None = None):
    ts = [t for t, _, _ in trace]
    # Floor at machine scale so a fully-converged (zero-gap) trace still
    # renders on the log axis.
    gaps = [max(g, 1e-16) for _, g, _ in trace]
    vals = [v for _, _, v in trace]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.loglog(ts, gaps, color="#b4443c")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("exploitability")
    ax1.set_title("best-response gap of averaged play")
    ax2.semilogx(ts, vals, color="#3c6eb4", label="averaged-play value")
    if lp_value is not None:
        ax2.axhline(lp_value, color="k", linestyle="--", linewidth=1, label="exact value")
    ax2.set_xlabel("iteration")
    ax2.set_ylabel("expected attacker reward")
    ax2.legend(fontsize=8)
    ax2.set_title("value estimate")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_detection_rates(path: Path, reports: list[DetectionReport]):
    labels = [r.scenario for r in reports]
    width = 0.35
    xs = range(len(reports))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([x - width / 2 for x in xs], [100 * r.naive_rate for r in reports],
           width, label="naive uniform", color="#888888")
    ax.bar([x + width / 2 for x in xs], [100 * r.rate for r in reports],
           width, label="equilibrium", color="#3c6eb4")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylabel("detection rate (%)")
    ax.set_title("FDIA detection rate by defense policy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
