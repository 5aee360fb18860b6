"""Covariance models and Gaussian sampling for the simulation harness.

Models use 1-based matrix indices in their definitions and unit diagonals
before any repair. Banded models that fail positive definiteness are
repaired by inflating the diagonal just past the most negative eigenvalue;
`CovModel` records whether that happened.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import CovarianceSpec, DataMatrix
from .errors import InvalidCovarianceError, InvalidParameterError


@dataclass(frozen=True)
class CovModel:
    """A named covariance model together with its realized matrix."""

    kind: str
    p: int
    rho: float | None
    repaired: bool
    min_eig_before: float
    spec: CovarianceSpec

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": int(self.p),
            "rho": None if self.rho is None else float(self.rho),
            "repaired": bool(self.repaired),
            "min_eig_before": float(self.min_eig_before),
        }


def _check_p(p: int) -> int:
    if int(p) != p or p < 2:
        raise InvalidParameterError(f"p must be an integer >= 2, got {p}")
    return int(p)


def cov_identity(p: int) -> CovarianceSpec:
    """Identity covariance."""
    return CovarianceSpec(np.eye(_check_p(p)))


def cov_compound_symmetry(p: int, rho: float) -> CovarianceSpec:
    """Unit diagonal with constant off-diagonal correlation rho.

    Positive definite exactly when -1/(p-1) < rho < 1.
    """
    p = _check_p(p)
    if not -1.0 / (p - 1) < rho < 1.0:
        raise InvalidParameterError(
            f"compound symmetry needs -1/(p-1) < rho < 1, got rho = {rho} for p = {p}"
        )
    entries = np.full((p, p), float(rho))
    np.fill_diagonal(entries, 1.0)
    return CovarianceSpec(entries)


def cov_two_entry(p: int, rho: float) -> CovarianceSpec:
    """Identity except for a single correlated pair: sigma_12 = rho.

    Eigenvalues are 1 +- rho and ones, so |rho| < 1 is required.
    """
    p = _check_p(p)
    if not -1.0 < rho < 1.0:
        raise InvalidParameterError(f"two-entry model needs |rho| < 1, got {rho}")
    entries = np.eye(p)
    entries[0, 1] = entries[1, 0] = float(rho)
    return CovarianceSpec(entries)


def ensure_pd(raw: np.ndarray, eps: float = 0.01) -> CovarianceSpec:
    """Return ``raw`` unchanged if positive definite, else repair it.

    The repair adds ``-min_eig + eps`` to the diagonal, shifting the
    spectrum so the smallest eigenvalue is exactly ``eps``.
    """
    if not eps > 0.0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
        raise InvalidCovarianceError(f"matrix must be square, got shape {raw.shape}")
    if not np.array_equal(raw, raw.T):
        raise InvalidCovarianceError("matrix must be symmetric")
    min_eig = float(np.linalg.eigvalsh(raw)[0])
    if min_eig > 0.0:
        return CovarianceSpec(raw)
    return CovarianceSpec(raw + (-min_eig + eps) * np.eye(raw.shape[0]))


def _banded_raw(p: int, setting: int) -> np.ndarray:
    idx = np.arange(1, p + 1)
    dist = np.abs(idx[:, None] - idx[None, :])
    half = p // 2
    if setting == 1:
        band = 2.0 * np.maximum(1.0 - dist / 10.0, 0.0)
        keep = (dist <= 5) & (np.maximum(idx[:, None], idx[None, :]) <= half)
        raw = np.where(keep, band, 0.0)
    else:
        # defined on i < j, then symmetrized: near band for i in the first
        # half, a wider shallower band for i in the second half
        i_grid = idx[:, None]
        near = 2.0 * np.maximum(1.0 - dist / 10.0, 0.0) * ((dist <= 5) & (i_grid <= half))
        far = 2.0 * np.maximum(1.0 - dist / 20.0, 0.0) * ((dist <= 10) & (i_grid > half))
        upper = np.triu(near + far, 1)
        raw = upper + upper.T
    np.fill_diagonal(raw, 1.0)
    return raw


def cov_banded_setting1(p: int) -> CovModel:
    """Banded covariance confined to the first half of the variables.

    Off-diagonal entries ``2 * max(1 - |i-j|/10, 0)`` for ``|i-j| <= 5``
    and ``max(i, j) <= p/2``; unit diagonal; repaired if needed.
    """
    p = _check_p(p)
    raw = _banded_raw(p, setting=1)
    min_eig = float(np.linalg.eigvalsh(raw)[0])
    return CovModel(
        kind="banded1",
        p=p,
        rho=None,
        repaired=min_eig <= 0.0,
        min_eig_before=min_eig,
        spec=ensure_pd(raw),
    )


def cov_banded_setting2(p: int) -> CovModel:
    """Two-regime banded covariance.

    For i < j: ``2 * max(1 - |i-j|/10, 0)`` when ``|i-j| <= 5`` and
    ``i <= p/2``, plus ``2 * max(1 - |i-j|/20, 0)`` when ``|i-j| <= 10``
    and ``i > p/2``; symmetrized, unit diagonal, repaired if needed.
    """
    p = _check_p(p)
    raw = _banded_raw(p, setting=2)
    min_eig = float(np.linalg.eigvalsh(raw)[0])
    return CovModel(
        kind="banded2",
        p=p,
        rho=None,
        repaired=min_eig <= 0.0,
        min_eig_before=min_eig,
        spec=ensure_pd(raw),
    )


def make_cov_model(kind: str, p: int, rho: float | None = None) -> CovModel:
    """Build any named model as a :class:`CovModel` record."""
    if kind == "identity":
        spec = cov_identity(p)
    elif kind == "compound_symmetry":
        if rho is None:
            raise InvalidParameterError("compound_symmetry requires rho")
        spec = cov_compound_symmetry(p, rho)
    elif kind == "two_entry":
        if rho is None:
            raise InvalidParameterError("two_entry requires rho")
        spec = cov_two_entry(p, rho)
    elif kind == "banded1":
        return cov_banded_setting1(p)
    elif kind == "banded2":
        return cov_banded_setting2(p)
    else:
        raise InvalidParameterError(f"unknown covariance model {kind!r}")
    min_eig = float(np.linalg.eigvalsh(spec.entries)[0])
    return CovModel(
        kind=kind, p=spec.p, rho=rho, repaired=False,
        min_eig_before=min_eig, spec=spec,
    )


def replicate_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Independent substream for replicate ``index`` of master ``seed``.

    Streams depend only on (seed, index), never on evaluation order.
    """
    return np.random.SeedSequence(int(seed), spawn_key=(int(index),))


def sample_mvn(
    spec: CovarianceSpec,
    n: int,
    seed: int | np.random.SeedSequence,
) -> DataMatrix:
    """Draw n i.i.d. mean-zero Gaussian rows with covariance ``spec``.

    Rows are ``z L^T`` for standard normal z and lower Cholesky L, so the
    same seed always yields bit-identical output.
    """
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n}")
    try:
        chol = np.linalg.cholesky(spec.entries)
    except np.linalg.LinAlgError:
        raise InvalidCovarianceError(
            "covariance is not positive definite; Cholesky factorization failed"
        ) from None
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((int(n), spec.p))
    return DataMatrix(z @ chol.T, centered=False)


def save_covariance(spec: CovarianceSpec, path: str) -> None:
    """Write the full covariance matrix as CSV that round-trips exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in spec.entries:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
