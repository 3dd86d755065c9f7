"""Headless figure rendering for the CLI report path.

Renders the same payloads the API serves: a bar chart of occurrence counts,
a timeline scatter (minutes on x, features on y), and a benchmark bar chart.
Figures go straight to files; nothing here feeds back into the payloads.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .summarize import LectureSummary, TimelineEntry
from .taxonomy import Taxonomy, feature_by_id
from .wer import BenchmarkReport


def _display(taxonomy: Taxonomy, feature_id: str) -> str:
    feature = feature_by_id(taxonomy, feature_id)
    return feature.display_name if feature else feature_id


def render_summary_counts(summary: LectureSummary, taxonomy: Taxonomy,
                          path: str | Path) -> Path:
    """Bar chart of occurrence counts per detected feature."""
    items = sorted(summary.counts.items())
    labels = [_display(taxonomy, fid) for fid, _ in items]
    values = [count for _, count in items]
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(items)), 4.5))
    ax.bar(range(len(items)), values, color="tab:blue")
    ax.set_xticks(range(len(items)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("occurrences")
    ax.set_title(f"Didactic features: {summary.lecture_id}")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_timeline(entries: list[TimelineEntry], taxonomy: Taxonomy,
                    path: str | Path) -> Path:
    """Scatter of occurrences over lecture time in minutes, one row per feature;
    state occurrences extend as horizontal spans."""
    feature_ids = sorted({e.feature_id for e in entries})
    rows = {fid: i for i, fid in enumerate(feature_ids)}
    fig, ax = plt.subplots(figsize=(9, max(3, 0.5 * len(feature_ids) + 1.5)))
    for entry in entries:
        y = rows[entry.feature_id]
        ax.plot(entry.start, y, "o", color="tab:blue", markersize=5)
        if entry.end is not None:
            ax.hlines(y, entry.start, entry.end, color="tab:blue", linewidth=3,
                      alpha=0.6)
    ax.set_yticks(range(len(feature_ids)))
    ax.set_yticklabels([_display(taxonomy, fid) for fid in feature_ids], fontsize=8)
    ax.set_xlabel("time (minutes)")
    ax.set_title("Feature occurrences over the lecture")
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_benchmark(report: BenchmarkReport, path: str | Path) -> Path:
    """Bar chart of mean WER percent per engine, best first."""
    engines = [row.engine_id for row in report.rows]
    means = [row.mean_wer_percent for row in report.rows]
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(engines)), 4.5))
    ax.bar(range(len(engines)), means, color="tab:orange")
    ax.set_xticks(range(len(engines)))
    ax.set_xticklabels(engines, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("mean WER (%)")
    ax.set_title("Transcription engines")
    for i, mean in enumerate(means):
        ax.text(i, mean, f"{mean:.2f}", ha="center", va="bottom", fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
