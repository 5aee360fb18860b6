"""Closed-form pairwise Bayes factors for covariance-structure testing.

Each column pair (i, j), i != j, is scored through the conditional
regression of column i on column j with a shrinkage factor gamma. Two
log Bayes factors are available, both computed entirely in log space:

one-sample (identity null, unit variances under H0):

    log BF(i,j) = a0*log(b0_ij) - logGamma(a0) + 0.5*log(gamma/(1+gamma))
                  + logGamma(n/2 + a0) + n*tau_i^2/2
                  - (n/2 + a0)*log(n*tau_{ij,gamma}^2/2 + b0_ij)

diagonality (scale-free null, improper variance prior on both sides):

    log BF(i,j) = 0.5*log(gamma/(1+gamma))
                  - (n/2)*log(tau_{ij,gamma}^2 / tau_i^2)

The diagonality factor depends only on the squared sample correlation, so
it is symmetric in (i, j) and invariant to rescaling either column; the
one-sample factor is neither.

Numerically collinear pairs make the empirical prior scale b0_ij collapse
(one-sample) or the log argument cancel to rounding noise (diagonality).
Such pairs come back flagged with a large finite sentinel value rather
than an infinity, so downstream maxima stay well-defined.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from math import lgamma, log

import numpy as np

from .errors import InvalidParameterError
from .pairstats import COLLINEAR_RTOL, GramCache

# Finite stand-in for a diverging log Bayes factor. Doubling it (the
# deviance-scale statistic) must stay below the float64 maximum.
LOG_BF_CAP = sys.float_info.max / 4

_TESTS = ("one_sample", "diagonality", "support", "pairwise_independence")


@dataclass(frozen=True)
class HyperParams:
    """Resolved hyperparameters for one test on one dataset shape.

    ``a0`` and the per-pair empirical scale ``b0_ij = tau_{ij,0}^2 * (a0-1)``
    fix the inverse-gamma prior; ``gamma`` shrinks the regression slope
    prior. ``b0_fixed`` overrides the empirical rule with a constant
    (used by quadrature oracles). ``alpha_fixed``/``gamma_fixed`` record
    whether the caller pinned those values, so re-resolution for a
    subsample keeps explicit overrides.
    """

    a0: float
    gamma: float
    test: str
    alpha: float | None = None
    gamma_mode: str = "max_np"
    k: float | None = None
    b0_fixed: float | None = None
    alpha_fixed: bool = False
    gamma_fixed: bool = False

    def __post_init__(self) -> None:
        if self.test not in _TESTS:
            raise InvalidParameterError(
                f"unknown test {self.test!r}, expected one of {_TESTS}"
            )
        if self.gamma_mode not in ("max_np", "n_only"):
            raise InvalidParameterError(
                f"unknown gamma_mode {self.gamma_mode!r}"
            )
        if not self.a0 > 0.0:
            raise InvalidParameterError(f"a0 must be positive, got {self.a0}")
        if self.b0_fixed is None and not self.a0 > 1.0:
            raise InvalidParameterError(
                f"empirical b0 rule needs a0 > 1, got a0 = {self.a0}"
            )
        if not self.gamma > 0.0:
            raise InvalidParameterError(f"gamma must be positive, got {self.gamma}")
        if self.alpha is not None and not self.alpha > 0.0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if self.k is not None and not self.k > 0.0:
            raise InvalidParameterError(f"K must be positive, got {self.k}")
        if self.b0_fixed is not None and not self.b0_fixed > 0.0:
            raise InvalidParameterError(
                f"b0 override must be positive, got {self.b0_fixed}"
            )

    @property
    def b0_policy(self) -> str:
        return "empirical" if self.b0_fixed is None else "fixed"


@dataclass(frozen=True)
class LogBF:
    """A single pairwise log Bayes factor.

    ``value`` is finite; when ``collinear_overflow`` is set it is the
    sentinel :data:`LOG_BF_CAP` instead of the (diverging) exact value.
    ``pair`` holds the 1-based (i, j) ordering that was scored.
    """

    value: float
    pair: tuple[int, int]
    collinear_overflow: bool = False


def default_hyperparams(
    n: int,
    p: int,
    test: str,
    k: float = 100.0,
    alpha: float | None = None,
    gamma: float | None = None,
) -> HyperParams:
    """Resolve the default hyperparameters for a given data shape.

    Defaults: ``a0 = 2 + K^-2``; ``alpha = 8.01*(1 - 1/log n)`` for the
    one-sample test and ``4.01*(1 - 1/log n)`` otherwise; ``gamma``
    equals ``max(n, p)^-alpha`` except for the pairwise independence
    test, which uses ``n^-alpha``. Explicit ``alpha``/``gamma`` win over
    the rules and are marked fixed.
    """
    if test not in _TESTS:
        raise InvalidParameterError(f"unknown test {test!r}, expected one of {_TESTS}")
    if int(n) != n or n < 3:
        raise InvalidParameterError(
            f"sample size n must be an integer >= 3 (log n > 1 needed), got {n}"
        )
    if int(p) != p or p < 1:
        raise InvalidParameterError(f"dimension p must be a positive integer, got {p}")
    if not k > 0.0:
        raise InvalidParameterError(f"K must be positive, got {k}")
    n, p = int(n), int(p)

    alpha_fixed = alpha is not None
    if alpha is None:
        scale = 8.01 if test == "one_sample" else 4.01
        alpha = scale * (1.0 - 1.0 / log(n))
    elif not alpha > 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")

    gamma_mode = "n_only" if test == "pairwise_independence" else "max_np"
    gamma_fixed = gamma is not None
    if gamma is None:
        base = n if gamma_mode == "n_only" else max(n, p)
        gamma = float(base) ** (-alpha)
    if not 0.0 < gamma < 1.0:
        raise InvalidParameterError(f"gamma must lie in (0, 1), got {gamma}")

    return HyperParams(
        a0=2.0 + k ** -2,
        gamma=gamma,
        test=test,
        alpha=alpha,
        gamma_mode=gamma_mode,
        k=k,
        alpha_fixed=alpha_fixed,
        gamma_fixed=gamma_fixed,
    )


def resolve_for_shape(hp: HyperParams, n: int, p: int) -> HyperParams:
    """Re-resolve rule-derived hyperparameters for a new data shape.

    Used when scoring subsamples (cross-validation training halves):
    rule-based alpha/gamma track the subsample size, while explicitly
    fixed values and K carry over unchanged.
    """
    return default_hyperparams(
        n,
        p,
        hp.test,
        k=hp.k if hp.k is not None else 100.0,
        alpha=hp.alpha if hp.alpha_fixed else None,
        gamma=hp.gamma if hp.gamma_fixed else None,
    )


def _one_sample_rows(
    cache: GramCache,
    rows: np.ndarray,
    a0: float,
    gamma: float,
    b0_fixed: float | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Log BF values and collinearity flags for a block of i-rows."""
    n = cache.n
    s = cache.norms_sq
    si = s[rows][:, None]
    g = cache.gram[rows]
    proj = (g * g) / s[None, :]
    resid0 = si - proj
    resid_g = si - proj / (1.0 + gamma)
    const = (
        -lgamma(a0)
        + 0.5 * log(gamma / (1.0 + gamma))
        + lgamma(n / 2.0 + a0)
    )
    if b0_fixed is None:
        flags = resid0 <= COLLINEAR_RTOL * si
        b0 = (a0 - 1.0) / n * resid0
    else:
        b0 = np.full_like(resid0, b0_fixed)
        flags = 0.5 * resid_g + b0 <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        values = (
            a0 * np.log(b0)
            + const
            + 0.5 * si
            - (n / 2.0 + a0) * np.log(0.5 * resid_g + b0)
        )
    values[flags] = LOG_BF_CAP
    return values, flags


def _diag_rows(
    cache: GramCache, rows: np.ndarray, gamma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Log BF values and collinearity flags for a block of i-rows."""
    n = cache.n
    s = cache.norms_sq
    si = s[rows][:, None]
    g = cache.gram[rows]
    resid_g = si - (g * g) / s[None, :] / (1.0 + gamma)
    flags = resid_g <= COLLINEAR_RTOL * si
    with np.errstate(divide="ignore", invalid="ignore"):
        values = 0.5 * log(gamma / (1.0 + gamma)) - 0.5 * n * np.log(resid_g / si)
    values[flags] = LOG_BF_CAP
    return values, flags


def _sweep(compute_rows, p: int, threads: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate row blocks, optionally on a capped thread pool.

    Blocks are disjoint and reassembled in index order, so results are
    identical for any thread count.
    """
    if threads < 1:
        raise InvalidParameterError(f"threads must be >= 1, got {threads}")
    chunks = np.array_split(np.arange(p), min(threads, p))
    if threads == 1 or len(chunks) == 1:
        parts = [compute_rows(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(compute_rows, chunks))
    values = np.vstack([part[0] for part in parts])
    flags = np.vstack([part[1] for part in parts])
    np.fill_diagonal(values, -np.inf)
    np.fill_diagonal(flags, False)
    return values, flags


def one_sample_log_bf_matrix(
    cache: GramCache, hp: HyperParams, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs one-sample log BF matrix and collinearity flags.

    Entry (i, j) scores column i regressed on column j; the diagonal is
    set to -inf so it never participates in maxima.
    """
    return _sweep(
        lambda rows: _one_sample_rows(cache, rows, hp.a0, hp.gamma, hp.b0_fixed),
        cache.p,
        threads,
    )


def diag_log_bf_matrix(
    cache: GramCache, gamma: float, threads: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """All-pairs diagonality log BF matrix and collinearity flags."""
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return _sweep(
        lambda rows: _diag_rows(cache, rows, gamma), cache.p, threads
    )


def log_bf_one_sample(
    cache: GramCache,
    i: int,
    j: int,
    hp: HyperParams,
    a0: float | None = None,
    b0: float | None = None,
    gamma: float | None = None,
) -> LogBF:
    """One-sample log Bayes factor for the ordered pair (i, j), 1-based.

    ``a0``, ``b0``, ``gamma`` override the corresponding hyperparameters
    (explicit ``b0`` replaces the empirical per-pair rule), which lets
    oracle tests pin every prior constant.
    """
    i0, j0 = cache.check_pair(i, j)
    eff = hp
    if a0 is not None or b0 is not None or gamma is not None:
        eff = replace(
            hp,
            a0=hp.a0 if a0 is None else a0,
            gamma=hp.gamma if gamma is None else gamma,
            b0_fixed=hp.b0_fixed if b0 is None else b0,
        )
    values, flags = _one_sample_rows(
        cache, np.array([i0]), eff.a0, eff.gamma, eff.b0_fixed
    )
    return LogBF(
        value=float(values[0, j0]),
        pair=(i, j),
        collinear_overflow=bool(flags[0, j0]),
    )


def log_bf_diag(cache: GramCache, i: int, j: int, gamma: float) -> LogBF:
    """Diagonality log Bayes factor for the pair (i, j), 1-based."""
    i0, j0 = cache.check_pair(i, j)
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    values, flags = _diag_rows(cache, np.array([i0]), gamma)
    return LogBF(
        value=float(values[0, j0]),
        pair=(i, j),
        collinear_overflow=bool(flags[0, j0]),
    )
