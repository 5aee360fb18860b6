"""Maximum pairwise Bayes factor tests with extreme-value calibration.

A test scans all column pairs, takes the maximum log Bayes factor, and
reports the deviance-scale statistic ``2 * max log BF``. The one-sample
test scans ordered pairs (the factor is asymmetric); the diagonality
test scans unordered pairs i < j.

Under a Gaussian null with independent columns, the centered diagonality
statistic ``2*max log BF - c_np(n, p, gamma)`` converges to the law

    F(z) = exp(-(8*pi)^{-1/2} * exp(-z/2)),

which yields an asymptotic size-alpha threshold and p-values. The
centering constant is

    c_np = log(gamma/(1+gamma)) + 4*log(p) - log(log(p)).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import exp, log, pi, sqrt

import numpy as np

from .bayesfactor import (
    HyperParams,
    diag_log_bf_matrix,
    one_sample_log_bf_matrix,
)
from .dataio import DataMatrix
from .errors import DegenerateDataError, InvalidPairError, InvalidParameterError
from .pairstats import build_gram

_SQRT_8PI = sqrt(8.0 * pi)

REJECT = "reject_null"
RETAIN = "retain_null"


@dataclass(frozen=True)
class TestOutcome:
    """Result of a maximum pairwise Bayes factor test.

    ``statistic`` is on the deviance scale (twice the max log BF),
    ``argmax_pair`` is the 1-based pair attaining it (lexicographically
    smallest on ties), and ``threshold`` is the value the statistic was
    compared against. ``pvalue`` is set only by the asymptotic
    diagonality rule.
    """

    statistic: float
    argmax_pair: tuple[int, int]
    decision: str
    threshold: float
    n: int
    p: int
    gamma: float
    alpha: float | None
    test: str
    pvalue: float | None = None
    a0: float | None = None
    k: float | None = None

    def to_json_dict(self) -> dict:
        record = {
            "statistic": float(self.statistic),
            "argmax": [int(self.argmax_pair[0]), int(self.argmax_pair[1])],
            "decision": self.decision,
            "threshold": float(self.threshold),
            "n": int(self.n),
            "p": int(self.p),
            "gamma": float(self.gamma),
            "alpha": None if self.alpha is None else float(self.alpha),
        }
        if self.pvalue is not None:
            record["pvalue"] = float(self.pvalue)
        if self.a0 is not None:
            record["a0"] = float(self.a0)
        if self.k is not None:
            record["k"] = float(self.k)
        return record


def gumbel_cdf(z: float) -> float:
    """Limiting null distribution of the centered maximum statistic."""
    z = float(z)
    if z != z:
        raise InvalidParameterError("gumbel_cdf: z is NaN")
    if z < -1400.0:  # exp(-z/2) would overflow; the cdf is 0 to double precision
        return 0.0
    return exp(-exp(-0.5 * z) / _SQRT_8PI)


def gumbel_quantile(u: float) -> float:
    """Inverse of :func:`gumbel_cdf` on (0, 1)."""
    if not 0.0 < u < 1.0:
        raise InvalidParameterError(f"quantile level must be in (0, 1), got {u}")
    return -2.0 * log(_SQRT_8PI * (-log(u)))


def c_np(n: int, p: int, gamma: float) -> float:
    """Centering constant for the diagonality statistic's null limit."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if p < 2:
        raise InvalidParameterError(f"p must be >= 2, got {p}")
    if not gamma > 0.0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return log(gamma / (1.0 + gamma)) + 4.0 * log(p) - log(log(p))


def _check_testable(data: DataMatrix) -> None:
    if data.n < 2:
        raise InvalidParameterError(
            f"tests need at least 2 rows, got n = {data.n}"
        )
    if data.p < 2:
        raise InvalidParameterError(
            f"tests need at least 2 columns, got p = {data.p}"
        )


def _max_over(values: np.ndarray, flags: np.ndarray, scope: str) -> tuple[float, tuple[int, int], bool]:
    """Max and argmax over ordered pairs or the upper triangle.

    Row-major argmax scanning gives the lexicographically smallest pair
    on ties. Returns (max log BF, 1-based pair, any_flagged).
    """
    p = values.shape[0]
    if scope == "upper":
        masked = np.where(np.triu(np.ones((p, p), dtype=bool), 1), values, -np.inf)
        active_flags = np.triu(flags, 1)
        n_pairs = p * (p - 1) // 2
    else:
        masked = values  # diagonal already -inf
        active_flags = flags
        n_pairs = p * (p - 1)
    if int(active_flags.sum()) == n_pairs:
        raise DegenerateDataError(
            "every column pair is numerically collinear; no informative pairs"
        )
    if active_flags.any():
        warnings.warn(
            "collinear column pair(s); their Bayes factors were capped and force rejection",
            RuntimeWarning,
            stacklevel=3,
        )
    flat = int(np.argmax(masked))
    i0, j0 = divmod(flat, p)
    return float(masked[i0, j0]), (i0 + 1, j0 + 1), bool(active_flags.any())


def one_sample_test(
    data: DataMatrix,
    hp: HyperParams,
    threshold: float = 0.0,
    threads: int = 1,
) -> TestOutcome:
    """Test H0: covariance equals the identity, scanning ordered pairs.

    Rejects when ``2 * max log BF`` exceeds ``threshold``. To test
    against a general null covariance, apply
    :func:`pairbayes.dataio.transform_null` first.
    """
    _check_testable(data)
    cache = build_gram(data)
    values, flags = one_sample_log_bf_matrix(cache, hp, threads=threads)
    best, pair, _ = _max_over(values, flags, scope="ordered")
    statistic = 2.0 * best
    return TestOutcome(
        statistic=statistic,
        argmax_pair=pair,
        decision=REJECT if statistic > threshold else RETAIN,
        threshold=float(threshold),
        n=data.n,
        p=data.p,
        gamma=hp.gamma,
        alpha=hp.alpha,
        test="one_sample",
        a0=hp.a0,
        k=hp.k,
    )


def diagonality_test(
    data: DataMatrix,
    hp: HyperParams,
    threshold: float | None = None,
    asymptotic_size: float | None = None,
    threads: int = 1,
) -> TestOutcome:
    """Test H0: covariance is diagonal, scanning unordered pairs i < j.

    Exactly one decision rule applies: a fixed ``threshold`` on the
    deviance-scale statistic (default 0), or ``asymptotic_size`` alpha,
    which thresholds at ``c_np + gumbel_quantile(1 - alpha)`` and also
    reports the asymptotic p-value. The limit is an asymptotic statement
    in p; a warning is emitted for p < 50.
    """
    if threshold is not None and asymptotic_size is not None:
        raise InvalidParameterError(
            "give either threshold or asymptotic_size, not both"
        )
    _check_testable(data)
    cache = build_gram(data)
    values, flags = diag_log_bf_matrix(cache, hp.gamma, threads=threads)
    best, pair, _ = _max_over(values, flags, scope="upper")
    statistic = 2.0 * best

    pvalue = None
    if asymptotic_size is not None:
        if not 0.0 < asymptotic_size < 1.0:
            raise InvalidParameterError(
                f"asymptotic size must be in (0, 1), got {asymptotic_size}"
            )
        if data.p < 50:
            warnings.warn(
                f"asymptotic size rule is calibrated for large p; p = {data.p} < 50",
                RuntimeWarning,
                stacklevel=2,
            )
        center = c_np(data.n, data.p, hp.gamma)
        threshold_used = center + gumbel_quantile(1.0 - asymptotic_size)
        pvalue = 1.0 - gumbel_cdf(statistic - center)
    else:
        threshold_used = 0.0 if threshold is None else float(threshold)

    return TestOutcome(
        statistic=statistic,
        argmax_pair=pair,
        decision=REJECT if statistic > threshold_used else RETAIN,
        threshold=threshold_used,
        n=data.n,
        p=data.p,
        gamma=hp.gamma,
        alpha=hp.alpha,
        test="diagonality",
        pvalue=pvalue,
    )


def pairwise_independence_test(
    data: DataMatrix,
    i: int,
    j: int,
    alpha_exp: float,
    threshold: float = 0.0,
) -> TestOutcome:
    """Test H0: columns i and j (1-based) are uncorrelated.

    Uses the diagonality Bayes factor for the single pair with
    ``gamma = n^-alpha_exp`` and the larger of the two orderings.
    """
    _check_testable(data)
    if not alpha_exp > 0.0:
        raise InvalidParameterError(
            f"alpha_exp must be positive, got {alpha_exp}"
        )
    for idx in (i, j):
        if not 1 <= idx <= data.p:
            raise InvalidPairError(f"column index {idx} out of range 1..{data.p}")
    if i == j:
        raise InvalidPairError(f"pair requires two distinct columns, got ({i}, {j})")

    gamma = float(data.n) ** (-alpha_exp)
    sub = DataMatrix(data.values[:, [i - 1, j - 1]], centered=data.centered)
    cache = build_gram(sub)
    values, flags = diag_log_bf_matrix(cache, gamma)
    best, _, _ = _max_over(values, flags, scope="upper")
    statistic = 2.0 * best
    return TestOutcome(
        statistic=statistic,
        argmax_pair=(min(i, j), max(i, j)),
        decision=REJECT if statistic > threshold else RETAIN,
        threshold=float(threshold),
        n=data.n,
        p=data.p,
        gamma=gamma,
        alpha=float(alpha_exp),
        test="pairwise_independence",
    )
