"""Per-pair sufficient statistics from a single Gram pass.

Every pairwise quantity used by the tests reduces to inner products of
data columns, so one O(n p^2) Gram computation makes each pair O(1):

    n * tau_i^2            = ||x_i||^2
    n * tau_{ij,gamma}^2   = ||x_i||^2 - (x_j^T x_i)^2 / ((1+gamma) ||x_j||^2)
    rho_ij^2               = (x_j^T x_i)^2 / (||x_i||^2 ||x_j||^2)

tau_{ij,gamma}^2 is the shrunken residual mean square of x_i regressed on
x_j; gamma = 0 gives the plain regression residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import DataMatrix
from .errors import DegenerateDataError, InvalidPairError, InvalidParameterError

# Pairs whose shrunken residual falls below this fraction of the total mean
# square are treated as numerically collinear: the log Bayes factors would
# otherwise take logs of quantities dominated by cancellation error.
COLLINEAR_RTOL = 1e-14


@dataclass(frozen=True)
class GramCache:
    """Gram matrix X^T X with its diagonal split out.

    Attributes
    ----------
    gram : np.ndarray
        (p, p) symmetric matrix of column inner products.
    norms_sq : np.ndarray
        (p,) vector of squared column norms; equals ``diag(gram)`` exactly.
    n, p : int
        Row and column counts of the source matrix.
    """

    gram: np.ndarray
    norms_sq: np.ndarray
    n: int
    p: int

    def __post_init__(self) -> None:
        self.gram.setflags(write=False)
        self.norms_sq.setflags(write=False)

    def check_pair(self, i: int, j: int) -> tuple[int, int]:
        """Validate 1-based column indices and return them 0-based."""
        for idx in (i, j):
            if not 1 <= idx <= self.p:
                raise InvalidPairError(
                    f"column index {idx} out of range 1..{self.p}"
                )
        if i == j:
            raise InvalidPairError(f"pair requires two distinct columns, got ({i}, {j})")
        return i - 1, j - 1


def build_gram(data: DataMatrix) -> GramCache:
    """Compute the Gram cache for ``data``.

    Raises :class:`DegenerateDataError` when a column has zero norm, since
    every pair statistic divides by the squared norms.
    """
    values = data.values
    gram = values.T @ values
    gram = (gram + gram.T) / 2.0  # BLAS output symmetrized exactly
    norms_sq = np.ascontiguousarray(np.diag(gram))
    dead = np.flatnonzero(norms_sq <= 0.0)
    if dead.size:
        raise DegenerateDataError(
            f"column {dead[0] + 1} has zero norm; pair statistics undefined"
        )
    return GramCache(gram=gram, norms_sq=norms_sq, n=data.n, p=data.p)


def tau_i_sq(cache: GramCache, i: int) -> float:
    """Total mean square of column i: ||x_i||^2 / n."""
    if not 1 <= i <= cache.p:
        raise InvalidPairError(f"column index {i} out of range 1..{cache.p}")
    return float(cache.norms_sq[i - 1] / cache.n)


def tau_ij_gamma_sq(cache: GramCache, i: int, j: int, gamma: float) -> float:
    """Shrunken residual mean square of column i regressed on column j.

    Equals ``(||x_i||^2 - (x_j^T x_i)^2 / ((1+gamma) ||x_j||^2)) / n``; at
    gamma = 0 this is the ordinary regression residual mean square, and it
    increases monotonically in gamma toward ``tau_i_sq``.
    """
    i0, j0 = cache.check_pair(i, j)
    if gamma < 0.0:
        raise InvalidParameterError(f"gamma must be nonnegative, got {gamma}")
    g = cache.gram[i0, j0]
    return float(
        (cache.norms_sq[i0] - (g * g / cache.norms_sq[j0]) / (1.0 + gamma))
        / cache.n
    )


def sample_correlation_sq(cache: GramCache, i: int, j: int) -> float:
    """Squared (uncentered) sample correlation of columns i and j."""
    i0, j0 = cache.check_pair(i, j)
    g = cache.gram[i0, j0]
    return float(g * g / (cache.norms_sq[i0] * cache.norms_sq[j0]))
