"""Benchmark and evaluation reports: text table, JSON, CSV, and rendered figures.

The matrix mirrors the Error / SS layout: per provider, "Error: No" means the
final script ran without syntax-class errors, "SS: Yes" means the expected
screenshot was produced. Figures are written as PNG files next to the
delimited output.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from PIL import Image

from .evaluation import ImageComparison
from .tasks import BenchmarkMatrix

_GOOD = "#8fd19e"
_BAD = "#f1948a"


def matrix_to_dict(matrix: BenchmarkMatrix) -> dict:
    return {
        "tasks": [task.id.value for task in matrix.tasks],
        "providers": list(matrix.provider_labels),
        "cells": [
            {
                "task_id": cell.task_id.value,
                "provider_label": cell.provider_label,
                "error_free": cell.error_free,
                "screenshot_produced": cell.screenshot_produced,
                "iterations_used": cell.iterations_used,
                "note": cell.note,
            }
            for cell in matrix.cells
        ],
    }


def write_matrix_json(matrix: BenchmarkMatrix, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(matrix_to_dict(matrix), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_matrix_csv(matrix: BenchmarkMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["task_id", "provider", "error_free", "screenshot_produced", "iterations_used"]
        )
        for cell in matrix.cells:
            writer.writerow(
                [
                    cell.task_id.value,
                    cell.provider_label,
                    cell.error_free,
                    cell.screenshot_produced,
                    cell.iterations_used,
                ]
            )


def render_matrix_text(matrix: BenchmarkMatrix) -> str:
    """Fixed-width table with one Error/SS column pair per provider."""
    label_width = max(
        [len("Visualization")] + [len(task.title) for task in matrix.tasks]
    )
    column_width = max([12] + [len(label) + 2 for label in matrix.provider_labels])

    def pad(text: str, width: int) -> str:
        return text.ljust(width)

    lines = []
    header = pad("Visualization", label_width)
    subheader = pad("", label_width)
    for label in matrix.provider_labels:
        header += "  " + pad(label, column_width)
        subheader += "  " + pad("Error  SS", column_width)
    lines.append(header.rstrip())
    lines.append(subheader.rstrip())
    for task in matrix.tasks:
        row = pad(task.title, label_width)
        for label in matrix.provider_labels:
            cell = matrix.cell(task.id, label)
            error_text = "No" if cell.error_free else "Yes"
            screenshot_text = "Yes" if cell.screenshot_produced else "No"
            row += "  " + pad(f"{error_text:<5}  {screenshot_text}", column_width)
        lines.append(row.rstrip())
    return "\n".join(lines) + "\n"


def render_matrix_figure(matrix: BenchmarkMatrix, path: str | Path) -> None:
    """Colored pass/fail table as a PNG, one Error/SS pair per provider."""
    n_rows = len(matrix.tasks)
    n_cols = 2 * len(matrix.provider_labels)
    fig_width = 2.4 + 1.1 * n_cols
    fig_height = 1.2 + 0.45 * n_rows
    fig, ax = plt.subplots(figsize=(fig_width, fig_height))
    ax.axis("off")

    cell_text = []
    cell_colors = []
    for task in matrix.tasks:
        row_text = []
        row_colors = []
        for label in matrix.provider_labels:
            cell = matrix.cell(task.id, label)
            row_text.append("No" if cell.error_free else "Yes")
            row_colors.append(_GOOD if cell.error_free else _BAD)
            row_text.append("Yes" if cell.screenshot_produced else "No")
            row_colors.append(_GOOD if cell.screenshot_produced else _BAD)
        cell_text.append(row_text)
        cell_colors.append(row_colors)

    col_labels = []
    for label in matrix.provider_labels:
        col_labels.extend([f"{label}\nError", f"{label}\nSS"])

    table = ax.table(
        cellText=cell_text,
        cellColours=cell_colors,
        rowLabels=[task.title for task in matrix.tasks],
        colLabels=col_labels,
        loc="center",
        cellLoc="center",
    )
    table.scale(1.0, 1.6)
    ax.set_title("Script generation benchmark: errors and screenshots")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_image_diff_figure(
    candidate: str | Path,
    reference: str | Path,
    comparison: ImageComparison,
    path: str | Path,
) -> None:
    """Candidate / reference / per-pixel delta panels for eye-balling a mismatch."""
    cand = np.asarray(Image.open(candidate).convert("RGB"), dtype=np.int16)
    ref = np.asarray(Image.open(reference).convert("RGB"), dtype=np.int16)
    fig, axes = plt.subplots(1, 3, figsize=(12, 4.2))
    axes[0].imshow(cand.astype(np.uint8))
    axes[0].set_title("candidate")
    axes[1].imshow(ref.astype(np.uint8))
    axes[1].set_title("reference")
    if cand.shape == ref.shape:
        delta = np.abs(cand - ref).max(axis=2)
        im = axes[2].imshow(delta, cmap="inferno", vmin=0, vmax=255)
        fig.colorbar(im, ax=axes[2], fraction=0.046)
        fraction = comparison.differing_fraction or 0.0
        axes[2].set_title(f"max channel delta (differing {fraction:.2%})")
    else:
        axes[2].text(0.5, 0.5, "dimension mismatch", ha="center", va="center")
        axes[2].set_title("delta")
    for axis in axes:
        axis.set_xticks([])
        axis.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
