"""Figure rendering for the command-line report path.

Imported only when a figure was requested, so the core library carries
no plotting state. All figures are written to files (Agg backend).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evalmetrics import RocCurve
from .hyptest import gumbel_cdf
from .support import CVReport, SupportEstimate

_META = {"Software": None}  # keep PNG output free of version stamps


def save_roc_figure(curve: RocCurve, path: str, title: str = "ROC") -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(curve.fpr, curve.tpr, drawstyle="steps-post", color="tab:blue")
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title(f"{title} (AUC = {curve.auc:.3f})")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)


def save_cv_figure(report: CVReport, path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(report.grid, report.mean_mse, color="tab:blue")
    ax.axvline(report.chosen, color="tab:red", linestyle="--",
               label=f"chosen = {report.chosen:g}")
    ax.set_xlabel("selection threshold")
    ax.set_ylabel("mean held-out MSE")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)


def save_calibration_figure(stats, center: float, path: str) -> None:
    """Empirical CDF of centered null statistics against the limit law."""
    z = np.sort(np.asarray(stats, dtype=np.float64)) - center
    ecdf = np.arange(1, z.size + 1) / z.size
    grid = np.linspace(z[0] - 1.0, z[-1] + 1.0, 400)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.step(z, ecdf, where="post", label="empirical", color="tab:blue")
    ax.plot(grid, [gumbel_cdf(v) for v in grid], label="limit", color="tab:red")
    ax.set_xlabel("centered statistic")
    ax.set_ylabel("CDF")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)


def save_support_figure(estimate: SupportEstimate, path: str) -> None:
    grid = np.zeros((estimate.p, estimate.p))
    for i, j in estimate.pairs:
        grid[i - 1, j - 1] = grid[j - 1, i - 1] = 1.0
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(grid, cmap="Greys", interpolation="nearest")
    ax.set_title(f"selected support (threshold = {estimate.threshold:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_META)
    plt.close(fig)
