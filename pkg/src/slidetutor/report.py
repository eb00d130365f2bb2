"""Report rendering: aligned text tables, JSON, CSV, and metric figures.

``write_report_dir`` is the one-stop output path used by the CLI: it drops
``report.json``, ``metrics.csv``, and ``metrics.png`` side by side so a
run's numbers and its chart stay together.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evalharness import MetricReport

_ROW_ORDER = [
    ("rouge1_precision", lambda r: r.rouge1.precision),
    ("rouge1_recall", lambda r: r.rouge1.recall),
    ("rouge1_f1", lambda r: r.rouge1.f1),
    ("rouge2_precision", lambda r: r.rouge2.precision),
    ("rouge2_recall", lambda r: r.rouge2.recall),
    ("rouge2_f1", lambda r: r.rouge2.f1),
    ("rougeL_precision", lambda r: r.rougeL.precision),
    ("rougeL_recall", lambda r: r.rougeL.recall),
    ("rougeL_f1", lambda r: r.rougeL.f1),
    ("bleu", lambda r: r.bleu),
    ("cosine", lambda r: r.cosine),
]

_FIGURE_BARS = [
    ("ROUGE-1 F1", lambda r: r.rouge1.f1),
    ("ROUGE-2 F1", lambda r: r.rouge2.f1),
    ("ROUGE-L F1", lambda r: r.rougeL.f1),
    ("BLEU", lambda r: r.bleu),
    ("Cosine", lambda r: r.cosine),
]


def report_to_dict(report: MetricReport) -> dict:
    return {
        "config_label": report.config_label,
        "n_examples": report.n_examples,
        "rouge1": vars(report.rouge1),
        "rouge2": vars(report.rouge2),
        "rougeL": vars(report.rougeL),
        "bleu": report.bleu,
        "cosine": report.cosine,
    }


def render_table(reports: Sequence[MetricReport], percent: bool = False) -> str:
    """Aligned plain-text table, one column per configuration.

    ``percent`` multiplies every metric by 100 for display; stored values
    stay on the canonical [0, 1] scale.
    """
    scale = 100.0 if percent else 1.0
    header = ["metric"] + [r.config_label for r in reports]
    rows = [[name] + [f"{getter(r) * scale:.6f}" for r in reports]
            for name, getter in _ROW_ORDER]
    rows.append(["n_examples"] + [str(r.n_examples) for r in reports])
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
             for row in [header] + rows]
    return "\n".join(lines)


def write_json(path: str | Path, reports: Sequence[MetricReport]) -> None:
    payload = [report_to_dict(r) for r in reports]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def write_csv(path: str | Path, reports: Sequence[MetricReport]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric"] + [r.config_label for r in reports])
        for name, getter in _ROW_ORDER:
            writer.writerow([name] + [repr(getter(r)) for r in reports])
        writer.writerow(["n_examples"] + [r.n_examples for r in reports])


def write_figure(path: str | Path, reports: Sequence[MetricReport]) -> None:
    """Grouped bar chart of the headline metrics, one group per metric."""
    labels = [name for name, _ in _FIGURE_BARS]
    positions = range(len(labels))
    width = 0.8 / max(len(reports), 1)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for j, report in enumerate(reports):
        values = [getter(report) for _, getter in _FIGURE_BARS]
        offsets = [p + (j - (len(reports) - 1) / 2) * width for p in positions]
        ax.bar(offsets, values, width=width, label=report.config_label)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("Retrieval evaluation")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report_dir(directory: str | Path, reports: Sequence[MetricReport]) -> dict:
    """Write report.json, metrics.csv, and metrics.png into ``directory``.

    Returns the paths written, keyed by kind.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "report.json",
        "csv": out / "metrics.csv",
        "figure": out / "metrics.png",
    }
    write_json(paths["json"], reports)
    write_csv(paths["csv"], reports)
    write_figure(paths["figure"], reports)
    return paths
