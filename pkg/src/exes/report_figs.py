"""Figure rendering for evaluation reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _bar_pair(ax, labels, exes, baseline, ylabel, log=False):
    x = range(len(labels))
    width = 0.38
    ax.bar([i - width / 2 for i in x], exes, width, label="pruned", color="#2a9d8f")
    ax.bar([i + width / 2 for i in x], baseline, width, label="baseline", color="#e76f51")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=40, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if log:
        ax.set_yscale("log")
    ax.legend(fontsize=8)


def render_report_figures(report, timings: dict, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    methods = [m for m in timings if timings[m]["mean_latency_baseline"] > 0]
    if methods:
        fig, ax = plt.subplots(figsize=(7, 4))
        _bar_pair(
            ax,
            methods,
            [max(timings[m]["mean_latency_exes"], 1e-6) for m in methods],
            [max(timings[m]["mean_latency_baseline"], 1e-6) for m in methods],
            "mean latency (s)",
            log=True,
        )
        ax.set_title("Pruned vs exhaustive latency")
        fig.tight_layout()
        path = out / "latency.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    size_rows = [
        r for r in report.rows
        if r.get("mean_size_exes") is not None and r.get("mean_size_baseline") is not None
    ]
    if size_rows:
        fig, ax = plt.subplots(figsize=(7, 4))
        _bar_pair(
            ax,
            [r["method"] for r in size_rows],
            [r["mean_size_exes"] for r in size_rows],
            [r["mean_size_baseline"] for r in size_rows],
            "mean explanation size",
        )
        ax.set_title("Explanation sizes")
        fig.tight_layout()
        path = out / "sizes.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    prec_rows = [
        (r["method"], r.get("precision_at_1"), r.get("precision_at_5"),
         r.get("precision"), r.get("precision_star"))
        for r in report.rows
    ]
    prec_rows = [r for r in prec_rows if any(v is not None for v in r[1:])]
    if prec_rows:
        fig, ax = plt.subplots(figsize=(7, 4))
        labels = [r[0] for r in prec_rows]
        series = {
            "P@1": [r[1] for r in prec_rows],
            "P@5": [r[2] for r in prec_rows],
            "Prec": [r[3] for r in prec_rows],
            "Prec*": [r[4] for r in prec_rows],
        }
        x = range(len(labels))
        width = 0.2
        for j, (name, vals) in enumerate(series.items()):
            offs = (j - 1.5) * width
            ax.bar(
                [i + offs for i in x],
                [v if v is not None else 0.0 for v in vals],
                width,
                label=name,
            )
        ax.set_xticks(list(x))
        ax.set_xticklabels(labels, rotation=40, ha="right", fontsize=8)
        ax.set_ylim(0, 1.05)
        ax.set_ylabel("precision")
        ax.legend(fontsize=8)
        ax.set_title("Explanation precision vs exhaustive search")
        fig.tight_layout()
        path = out / "precision.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
