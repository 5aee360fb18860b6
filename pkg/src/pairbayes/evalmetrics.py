"""ROC curves, AUC, Kolmogorov-Smirnov distance, and null Monte Carlo.

The library computes curves and scalar summaries only; rendering is left
to callers (the command-line report path writes figures from these).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bayesfactor import HyperParams
from .errors import InvalidParameterError
from .hyptest import diagonality_test
from .simulate import cov_identity, replicate_seed, sample_mvn


@dataclass(frozen=True)
class RocCurve:
    """Operating points swept over the pooled statistic values.

    Points run from (0, 0) to (1, 1) with nondecreasing coordinates;
    ``thresholds[k]`` is the cutoff giving point k ("above threshold"
    counts as positive). ``auc`` is the trapezoidal area, which equals
    the Mann-Whitney statistic with ties counted half.
    """

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def csv_text(self) -> str:
        lines = ["fpr,tpr,threshold"]
        lines.extend(
            f"{repr(float(x))},{repr(float(y))},{repr(float(t))}"
            for x, y, t in zip(self.fpr, self.tpr, self.thresholds)
        )
        return "\n".join(lines) + "\n"

    def save_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.csv_text())


def roc_curve(
    null_stats: Sequence[float], alt_stats: Sequence[float]
) -> RocCurve:
    """ROC of the rule "statistic > threshold" for separating two samples."""
    null = np.asarray(null_stats, dtype=np.float64)
    alt = np.asarray(alt_stats, dtype=np.float64)
    if null.size == 0 or alt.size == 0:
        raise InvalidParameterError("roc_curve needs nonempty null and alt samples")
    if not (np.all(np.isfinite(null)) and np.all(np.isfinite(alt))):
        raise InvalidParameterError("roc_curve requires finite statistics")

    cuts = np.unique(np.concatenate([null, alt]))[::-1]
    null_sorted = np.sort(null)
    alt_sorted = np.sort(alt)
    # count of values strictly above each cut
    fpr = (null.size - np.searchsorted(null_sorted, cuts, side="right")) / null.size
    tpr = (alt.size - np.searchsorted(alt_sorted, cuts, side="right")) / alt.size
    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    thresholds = np.concatenate([[np.inf], cuts, [-np.inf]])
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=auc)


def ks_distance(samples: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Supremum distance between the empirical CDF and ``cdf``.

    Evaluated at the sorted sample points from both sides of each jump,
    which attains the supremum for a monotone reference cdf.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    if x.size == 0:
        raise InvalidParameterError("ks_distance needs a nonempty sample")
    m = x.size
    ref = np.array([cdf(v) for v in x], dtype=np.float64)
    upper = np.abs(np.arange(1, m + 1) / m - ref)
    lower = np.abs(np.arange(0, m) / m - ref)
    return float(max(upper.max(), lower.max()))


def mc_null_statistics(
    n: int, p: int, hp: HyperParams, reps: int, seed: int, threads: int = 1
) -> np.ndarray:
    """Diagonality statistics from ``reps`` independent N(0, I_p) datasets.

    Replicate r uses the substream (seed, r), so any subset of replicates
    can be reproduced independently and results do not depend on
    ``threads`` (which only caps workers inside each pair sweep).
    """
    if reps < 1:
        raise InvalidParameterError(f"reps must be >= 1, got {reps}")
    identity = cov_identity(p)
    stats = np.empty(reps, dtype=np.float64)
    for r in range(reps):
        data = sample_mvn(identity, n, replicate_seed(seed, r))
        stats[r] = diagonality_test(data, hp, threshold=0.0, threads=threads).statistic
    return stats
