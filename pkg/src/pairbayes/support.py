"""Covariance support recovery by thresholding pairwise Bayes factors.

A pair (i, j), i < j, enters the estimated support when its
deviance-scale diagonality score ``2 * log BF`` exceeds a threshold
``c_sel``. The threshold is chosen by repeated random splitting: score
pairs on the training rows, then ask how well the selected neighbors
predict each column on the held-out rows.

For a split with test rows I1 (|I1| = n1 = ceil(n/3)) and training rows
I2, the criterion is

    MSE(c) = sum_j avg_{l in S_j(c)} [ sum_{i in I1} (X_ij - X_il * beta_jl)^2 / (n1 - 1) ]

where S_j(c) is the set of partners of column j selected on I2 alone and
beta_jl is the least-squares slope of column j on column l. A column
whose S_j(c) is empty contributes its unregressed test mean square
``sum_{i in I1} X_ij^2 / (n1 - 1)`` (the empty-model prediction), which
penalizes under-selection; without it the criterion would be minimized
by selecting nothing. The chosen threshold is the smallest grid value
attaining the minimal mean MSE over splits.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, sqrt

import numpy as np

from .bayesfactor import HyperParams, diag_log_bf_matrix, resolve_for_shape
from .dataio import CovarianceSpec, DataMatrix
from .errors import DegenerateDataError, InvalidParameterError
from .pairstats import build_gram

DEFAULT_GRID_MIN = -7.0
DEFAULT_GRID_MAX = 10.0
DEFAULT_GRID_STEP = 0.2
DEFAULT_NSPLITS = 50


@dataclass(frozen=True)
class SupportEstimate:
    """Estimated off-diagonal support: 1-based pairs with i < j."""

    pairs: tuple[tuple[int, int], ...]
    threshold: float
    symmetrized: bool
    p: int

    def to_json_dict(self) -> dict:
        return {
            "threshold": float(self.threshold),
            "symmetrized": bool(self.symmetrized),
            "pairs": [[int(i), int(j)] for i, j in self.pairs],
        }

    def edges_csv(self) -> str:
        lines = ["i,j"]
        lines.extend(f"{i},{j}" for i, j in self.pairs)
        return "\n".join(lines) + "\n"

    def save_edges(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.edges_csv())


@dataclass(frozen=True)
class Confusion:
    """Pair-level confusion counts against a known support."""

    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class CVReport:
    """Cross-validation trace: the grid, mean MSE per grid point, choice."""

    grid: tuple[float, ...]
    mean_mse: tuple[float, ...]
    chosen: float
    nsplits: int
    seed: int
    n1: int
    fit_beta_on: str

    def to_json_dict(self) -> dict:
        return {
            "grid": [float(c) for c in self.grid],
            "mean_mse": [float(m) for m in self.mean_mse],
            "chosen": float(self.chosen),
            "nsplits": int(self.nsplits),
            "seed": int(self.seed),
            "n1": int(self.n1),
            "fit_beta_on": self.fit_beta_on,
        }


def default_grid(
    lo: float = DEFAULT_GRID_MIN,
    hi: float = DEFAULT_GRID_MAX,
    step: float = DEFAULT_GRID_STEP,
) -> np.ndarray:
    """Threshold grid lo, lo+step, ..., up to hi inclusive."""
    if not step > 0.0:
        raise InvalidParameterError(f"grid step must be positive, got {step}")
    if hi < lo:
        raise InvalidParameterError(f"grid bounds reversed: [{lo}, {hi}]")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.array([round(lo + step * k, 10) for k in range(count)])


def _pair_scores(data: DataMatrix, hp: HyperParams, threads: int = 1) -> np.ndarray:
    """Deviance-scale diagonality scores, diagonal at -inf."""
    cache = build_gram(data)
    values, _ = diag_log_bf_matrix(cache, hp.gamma, threads=threads)
    return 2.0 * values


def select_support(
    data: DataMatrix,
    hp: HyperParams,
    c_sel: float,
    symmetrize: bool = True,
    threads: int = 1,
) -> SupportEstimate:
    """Select pairs whose score exceeds ``c_sel``.

    With ``symmetrize`` (default) a pair's score is the larger of its two
    orderings; collinear pairs carry the capped sentinel and are selected
    at any finite threshold below it.
    """
    if data.p < 2:
        raise InvalidParameterError(f"support needs p >= 2, got {data.p}")
    scores = _pair_scores(data, hp, threads=threads)
    if symmetrize:
        scores = np.maximum(scores, scores.T)
    sel = np.argwhere(np.triu(scores > c_sel, 1))
    pairs = tuple((int(i) + 1, int(j) + 1) for i, j in sel)
    return SupportEstimate(
        pairs=pairs, threshold=float(c_sel), symmetrized=bool(symmetrize), p=data.p
    )


def confusion(estimate: SupportEstimate, truth: CovarianceSpec) -> Confusion:
    """Compare an estimated support against a covariance's true support."""
    if truth.p != estimate.p:
        raise InvalidParameterError(
            f"estimate is for p = {estimate.p} but truth has p = {truth.p}"
        )
    p = truth.p
    true_pairs = {
        (i + 1, j + 1)
        for i in range(p)
        for j in range(i + 1, p)
        if truth.entries[i, j] != 0.0
    }
    est_pairs = set(estimate.pairs)
    tp = len(est_pairs & true_pairs)
    fp = len(est_pairs - true_pairs)
    fn = len(true_pairs - est_pairs)
    tn = p * (p - 1) // 2 - tp - fp - fn
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def mcc(tp: int, tn: int, fp: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 when any margin is empty."""
    for name, v in (("tp", tp), ("tn", tn), ("fp", fp), ("fn", fn)):
        if v < 0:
            raise InvalidParameterError(f"{name} must be nonnegative, got {v}")
    denom = sqrt(float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    if denom == 0.0:
        return 0.0
    return (tp * tn - fp * fn) / denom


def error_count(conf: Confusion) -> int:
    """Number of misclassified pairs: false positives plus false negatives."""
    return conf.fp + conf.fn


def make_splits(
    n: int, nsplits: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Deterministic random splits (I1 test, I2 train), n1 = ceil(n/3).

    Split v draws from an independent substream keyed by (seed, v), so
    the list does not depend on evaluation order.
    """
    if nsplits < 1:
        raise InvalidParameterError(f"nsplits must be >= 1, got {nsplits}")
    n1 = ceil(n / 3)
    if n - n1 < 3:
        raise InvalidParameterError(
            f"n = {n} leaves fewer than 3 training rows (n1 = {n1})"
        )
    splits = []
    for v in range(nsplits):
        rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(v,)))
        test = np.sort(rng.choice(n, size=n1, replace=False))
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        splits.append((test, np.flatnonzero(mask)))
    return splits


def _split_matrices(
    data: DataMatrix,
    hp: HyperParams,
    split: tuple[np.ndarray, np.ndarray],
    fit_beta_on: str,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-split reusables: training scores, test RSS matrix, test norms."""
    if fit_beta_on not in ("test", "train"):
        raise InvalidParameterError(
            f"fit_beta_on must be 'test' or 'train', got {fit_beta_on!r}"
        )
    test_idx, train_idx = (np.asarray(split[0], int), np.asarray(split[1], int))
    n = data.n
    joined = np.concatenate([test_idx, train_idx])
    if joined.size != n or not np.array_equal(np.sort(joined), np.arange(n)):
        raise InvalidParameterError("split must partition the rows exactly once")
    if test_idx.size < 2 or train_idx.size < 3:
        raise InvalidParameterError(
            f"split needs >= 2 test and >= 3 training rows, got "
            f"{test_idx.size} and {train_idx.size}"
        )

    train = DataMatrix(data.values[train_idx], centered=data.centered)
    scores = _pair_scores(
        train, resolve_for_shape(hp, train.n, train.p), threads=threads
    )

    x1 = data.values[test_idx]
    gram1 = x1.T @ x1
    norms1 = np.ascontiguousarray(np.diag(gram1))
    with np.errstate(divide="ignore", invalid="ignore"):
        if fit_beta_on == "test":
            rss = norms1[:, None] - gram1 ** 2 / norms1[None, :]
        else:
            x2 = data.values[train_idx]
            gram2 = x2.T @ x2
            norms2 = np.diag(gram2)
            if np.any(norms2 <= 0.0):
                raise DegenerateDataError(
                    "a column is identically zero on the training rows"
                )
            beta = gram2 / norms2[None, :]
            rss = norms1[:, None] - 2.0 * beta * gram1 + beta ** 2 * norms1[None, :]
    return scores, rss, norms1


def _mse_at(
    scores: np.ndarray,
    rss: np.ndarray,
    norms1: np.ndarray,
    c_sel: float,
    n1: int,
) -> float:
    """The split MSE at one threshold, given the per-split matrices."""
    selected = scores > c_sel  # diagonal is -inf, never selected
    bad = (norms1 <= 0.0) & selected.any(axis=0)
    if np.any(bad):
        raise DegenerateDataError(
            f"column {int(np.flatnonzero(bad)[0]) + 1} selected as a predictor "
            "but identically zero on the test rows"
        )
    counts = selected.sum(axis=1)
    totals = np.where(selected, rss, 0.0).sum(axis=1)
    per_col = np.where(
        counts > 0,
        totals / (n1 - 1) / np.maximum(counts, 1),
        norms1 / (n1 - 1),
    )
    return float(per_col.sum())


def cv_mse(
    data: DataMatrix,
    hp: HyperParams,
    c_sel: float,
    split: tuple[np.ndarray, np.ndarray],
    fit_beta_on: str = "test",
    threads: int = 1,
) -> float:
    """Held-out prediction MSE of the support selected at ``c_sel``.

    ``split`` is a pair of 0-based row index arrays (test, train) that
    partition the data. Selection uses only the training rows; residuals
    are evaluated on the test rows.
    """
    scores, rss, norms1 = _split_matrices(data, hp, split, fit_beta_on, threads)
    scores = np.maximum(scores, scores.T)
    return _mse_at(scores, rss, norms1, c_sel, len(split[0]))


def cv_select_threshold(
    data: DataMatrix,
    hp: HyperParams,
    grid: np.ndarray | None = None,
    nsplits: int = DEFAULT_NSPLITS,
    seed: int = 0,
    fit_beta_on: str = "test",
    threads: int = 1,
) -> CVReport:
    """Choose a support threshold by repeated random splitting.

    Returns the full grid and mean MSE trace; ``chosen`` is the smallest
    grid value attaining the minimum mean MSE.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise InvalidParameterError("threshold grid is empty")
    if not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0.0):
        raise InvalidParameterError("grid must be finite and strictly increasing")
    splits = make_splits(data.n, nsplits, seed)
    n1 = len(splits[0][0])
    total = np.zeros(grid.size)
    for split in splits:
        scores, rss, norms1 = _split_matrices(data, hp, split, fit_beta_on, threads)
        scores = np.maximum(scores, scores.T)
        total += np.array(
            [_mse_at(scores, rss, norms1, c, n1) for c in grid]
        )
    mean_mse = total / len(splits)
    chosen = float(grid[int(np.argmin(mean_mse))])
    return CVReport(
        grid=tuple(float(c) for c in grid),
        mean_mse=tuple(float(m) for m in mean_mse),
        chosen=chosen,
        nsplits=int(nsplits),
        seed=int(seed),
        n1=int(n1),
        fit_beta_on=fit_beta_on,
    )
