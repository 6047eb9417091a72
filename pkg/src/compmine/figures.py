"""Matplotlib renderings of stats and evaluation reports.

Written next to the JSON/text outputs when a figures directory is given,
so report runs leave charts alongside the machine-readable files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import COMPARISON_LABELS, ELEMENT_KINDS
from .evaluate import EvalReport
from .ingest import StatsReport


def _finish(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_label_distribution(stats: StatsReport, path) -> Path:
    """Bar chart of quintuple counts per comparison label."""
    counts = [stats.label_counts[label] for label in COMPARISON_LABELS]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(COMPARISON_LABELS, counts, color="#4878d0")
    ax.set_ylabel("quintuples")
    ax.set_title("Comparison label distribution")
    for i, c in enumerate(counts):
        ax.text(i, c, str(c), ha="center", va="bottom", fontsize=8)
    return _finish(fig, Path(path))


def save_sentence_breakdown(stats: StatsReport, path) -> Path:
    """Comparative/non-comparative and mono/multi sentence counts."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5))
    ax1.bar(["comparative", "non-comparative"],
            [stats.comparative, stats.non_comparative],
            color=["#4878d0", "#d65f5f"])
    ax1.set_title("Sentences")
    ax2.bar(["mono", "multi"],
            [stats.mono_comparative, stats.multi_comparative],
            color=["#6acc64", "#ee854a"])
    ax2.set_title("Comparative sentences")
    return _finish(fig, Path(path))


def save_f1_bars(report: EvalReport, path) -> Path:
    """Per-label F1 bars with the macro-F1 reference line."""
    labels = [l for l in COMPARISON_LABELS if l in report.per_label]
    scores = [report.per_label[l].f1 for l in labels]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(labels, scores, color="#4878d0")
    ax.axhline(report.macro_f1, color="#d65f5f", linestyle="--",
               label=f"macro-F1 = {report.macro_f1:.4f}")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("Exact-quintuple F1 by comparison label")
    ax.legend()
    return _finish(fig, Path(path))


def save_stage2_bars(report: EvalReport, path) -> Path:
    """Span-extraction F1 per element kind, when stage metrics are present."""
    if not report.stage2:
        raise ValueError("report has no stage-2 section")
    scores = [report.stage2[k].f1 for k in ELEMENT_KINDS]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([k.capitalize() for k in ELEMENT_KINDS], scores, color="#6acc64")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("F1")
    ax.set_title("Exact-span F1 by element kind")
    return _finish(fig, Path(path))


def render_stats_figures(stats: StatsReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    return [
        save_label_distribution(stats, out / "label_distribution.png"),
        save_sentence_breakdown(stats, out / "sentence_breakdown.png"),
    ]


def render_eval_figures(report: EvalReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    paths = [save_f1_bars(report, out / "f1_by_label.png")]
    if report.stage2:
        paths.append(save_stage2_bars(report, out / "stage2_span_f1.png"))
    return paths
