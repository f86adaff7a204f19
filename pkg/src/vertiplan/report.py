"""Figure rendering for batch outputs: heatmaps, loss curves, study tables.

Every CLI stage that writes delimited data also drops a rendered figure next
to it, so a run directory reads as a report without further tooling.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .study import StudyRow


def save_heatmap(
    matrix: np.ndarray,
    path: str | Path,
    title: str,
    label: str = "value",
    cmap: str = "viridis",
    markers: list[tuple[int, int]] | None = None,
) -> None:
    matrix = np.asarray(matrix)
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    image = ax.imshow(matrix, origin="upper", cmap=cmap, interpolation="nearest")
    if markers:
        ax.scatter(
            [j for _, j in markers],
            [i for i, _ in markers],
            s=70,
            facecolors="none",
            edgecolors="red",
            linewidths=1.4,
        )
    ax.set_title(title)
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    fig.colorbar(image, ax=ax, label=label, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_loss_curve(history: list[tuple[int, int]], path: str | Path, title: str) -> None:
    iterations = [it for it, _ in history]
    losses = [loss for _, loss in history]
    fig, ax = plt.subplots(figsize=(6.8, 4.2))
    ax.plot(iterations, losses, lw=1.6)
    ax.scatter([iterations[0], iterations[-1]], [losses[0], losses[-1]], s=18, zorder=3)
    ax.set_title(title)
    ax.set_xlabel("iteration")
    ax.set_ylabel("total unmet demand")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_demand_report(demand: np.ndarray, png_path: str | Path) -> None:
    """Spatial total and per-bin totals of a demand tensor, side by side."""
    demand = np.asarray(demand)
    fig, (left, right) = plt.subplots(1, 2, figsize=(11.0, 4.4))
    image = left.imshow(demand.sum(axis=0), origin="upper", cmap="magma", interpolation="nearest")
    left.set_title("demand, all bins")
    left.set_xlabel("column")
    left.set_ylabel("row")
    fig.colorbar(image, ax=left, shrink=0.9)
    right.bar(np.arange(demand.shape[0]), demand.sum(axis=(1, 2)), color="#3567a8")
    right.set_title("demand per time bin")
    right.set_xlabel("bin")
    right.set_ylabel("trips")
    fig.tight_layout()
    fig.savefig(png_path, dpi=130)
    plt.close(fig)


def save_study_csv(rows: list[StudyRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "strategy", "over_cluster", "init_loss", "optimized_loss"])
        for row in rows:
            writer.writerow(
                [row.algorithm, row.strategy, row.over_cluster, row.init_loss, row.optimized_loss]
            )


def save_study_figure(rows: list[StudyRow], path: str | Path, title: str) -> None:
    labels = [f"{row.algorithm}\n{row.strategy}" for row in rows]
    x = np.arange(len(rows))
    width = 0.38
    fig, ax = plt.subplots(figsize=(1.15 * len(rows) + 2.5, 4.4))
    ax.bar(x - width / 2, [row.init_loss for row in rows], width, label="initial")
    ax.bar(x + width / 2, [row.optimized_loss for row in rows], width, label="optimized")
    ax.set_xticks(x, labels, fontsize=8)
    ax.set_ylabel("total unmet demand")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
