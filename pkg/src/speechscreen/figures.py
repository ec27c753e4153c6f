"""Report figures rendered straight to PNG files.

Backend is forced to Agg before pyplot loads so report generation works
headless, and the PNG Software text chunk is stripped to keep files
byte-stable across matplotlib patch versions.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .manifest import Diagnosis  # noqa: E402

_META = {"Software": None}


def metric_histogram(values, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(list(values), bins=20, color="#4878b0", edgecolor="black")
    ax.set_title(title)
    ax.set_xlabel("metric value")
    ax.set_ylabel("repetitions")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def confusion_figure(matrix, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(matrix, cmap="Blues")
    names = [d.name for d in Diagnosis]
    ax.set_xticks(range(len(names)), names)
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    vmax = matrix.max() if matrix.max() else 1
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(
                j,
                i,
                str(int(matrix[i, j])),
                ha="center",
                va="center",
                color="white" if matrix[i, j] > vmax / 2 else "black",
            )
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def candidate_bars(ids, means, stds, ylabel: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(ids)), 4))
    x = range(len(ids))
    ax.bar(x, means, yerr=stds, capsize=3, color="#6aa46a", edgecolor="black")
    ax.set_xticks(list(x), list(ids))
    ax.set_ylabel(f"validation {ylabel}")
    ax.set_xlabel("candidate")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
