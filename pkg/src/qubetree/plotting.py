"""Figures for benchmark reports: measured medians plus the dashed linear fit."""
from __future__ import annotations

import math
import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .bench import BenchResult  # noqa: E402

X_LABELS = {
    "flat": "leaves",
    "branch": "branching depth",
    "wide": "total nodes",
    "sparse": "leaves per input",
    "dense": "leaves per input",
    "progressive": "qubes unioned",
}


def _xlabel(label: str) -> str:
    return X_LABELS.get(label.rsplit("/", 1)[-1], "size")


def plot_results(results: Sequence[BenchResult], path: str | os.PathLike, title: str | None = None) -> None:
    """One panel per result, written to ``path`` (format from the suffix)."""
    n = max(len(results), 1)
    ncols = min(n, 3)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.2 * ncols, 3.4 * nrows), squeeze=False)
    for ax in axes.flat[len(results):]:
        ax.set_visible(False)
    for ax, r in zip(axes.flat, results):
        ms = [t / 1e6 for t in r.times_ns]
        ax.plot(r.sizes, ms, "o", color="tab:blue", label="median")
        if r.has_fit:
            lo, hi = min(r.sizes), max(r.sizes)
            ax.plot([lo, hi], [(r.slope * x + r.intercept) / 1e6 for x in (lo, hi)], "--",
                    color="0.4", label=f"linear fit, $r^2$={r.r2:.3f}")
        ax.set_title(r.label, fontsize=10)
        ax.set_xlabel(_xlabel(r.label))
        ax.set_ylabel("time [ms]")
        ax.legend(fontsize=7, frameon=False)
        ax.grid(alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
