"""Matplotlib renderings of reports, LR schedules, and analyzed curves.

All functions write image files; nothing here affects the data outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import REGION_TITLES, ReportDocument
from .schedules import CurvePhases, moving_average


def aggregate_bars(doc: ReportDocument, path) -> None:
    """Grouped bars of the aggregate mean per metric row and region."""
    rows = list(doc.aggregate.means)
    tags = list(REGION_TITLES)
    x = np.arange(len(rows))
    width = 0.8 / len(tags)
    fig, ax = plt.subplots(figsize=(1.8 * len(rows) + 2, 4.5))
    for i, tag in enumerate(tags):
        vals = [doc.aggregate.means[row][tag] for row in rows]
        errs = [doc.aggregate.stds.get(row, {}).get(tag, 0.0) for row in rows]
        ax.bar(x + (i - 1) * width, vals, width, yerr=errs, capsize=3, label=REGION_TITLES[tag])
    ax.set_xticks(x)
    ax.set_xticklabels(rows, rotation=20, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"Aggregate scores over {doc.aggregate.case_count} cases")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def schedule_figure(schedule: list[tuple[int, float]], path, log_scale: bool = True) -> None:
    epochs = [e for e, _ in schedule]
    lrs = [lr for _, lr in schedule]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(epochs, lrs)
    if log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("epoch")
    ax.set_ylabel("learning rate")
    ax.set_title("Learning rate schedule")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def phases_figure(epochs, train_loss, val_score, phases: CurvePhases, path, window: int = 11) -> None:
    epochs = np.asarray(epochs)
    fig, ax1 = plt.subplots(figsize=(8, 4.5))
    ax1.plot(epochs, moving_average(np.asarray(train_loss, dtype=float), window), "C0", label="train loss (smoothed)")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("train loss", color="C0")
    ax2 = ax1.twinx()
    ax2.plot(epochs, moving_average(np.asarray(val_score, dtype=float), window), "C1", label="val score (smoothed)")
    ax2.set_ylabel("val score", color="C1")
    for epoch, color, name in (
        (phases.fit_epoch, "green", "fit"),
        (phases.overfit_epoch, "orange", "overfit"),
        (phases.grok_epoch, "red", "grok"),
    ):
        if epoch is not None:
            ax1.axvline(epoch, color=color, linestyle="--", alpha=0.7)
            ax1.text(epoch, ax1.get_ylim()[1], name, color=color, ha="left", va="top")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
