"""Loading, validating, and transforming n-by-p observation matrices.

Columns are variables, rows are observations. Public index arguments and
reported pairs throughout the package are 1-based, matching the column
numbering of the delimited files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    InvalidCovarianceError,
    MalformedInputError,
)

_DELIMITERS = {"csv": ",", "tsv": "\t"}


@dataclass(frozen=True)
class DataMatrix:
    """Immutable n-by-p observation matrix.

    Attributes
    ----------
    values : np.ndarray
        Float64 matrix of shape (n, p). The array is marked read-only.
    centered : bool
        Whether columns have been mean-centered.
    columns : tuple of str, optional
        Column names when the source file had a header row.
    """

    values: np.ndarray
    centered: bool = False
    columns: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise MalformedInputError(
                f"expected a 2-d matrix, got {values.ndim}-d input"
            )
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise MalformedInputError(f"empty matrix of shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise MalformedInputError("matrix contains non-finite entries")
        if self.columns is not None and len(self.columns) != values.shape[1]:
            raise MalformedInputError(
                f"{len(self.columns)} column names for {values.shape[1]} columns"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CovarianceSpec:
    """Symmetric p-by-p covariance matrix.

    Positive definiteness is enforced where it is consumed (Cholesky
    sampling, null transforms), not at construction, so that repair
    helpers can build the object from already-checked entries.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidCovarianceError(
                f"covariance must be square, got shape {entries.shape}"
            )
        if not np.all(np.isfinite(entries)):
            raise InvalidCovarianceError("covariance contains non-finite entries")
        if not np.array_equal(entries, entries.T):
            raise InvalidCovarianceError("covariance is not exactly symmetric")
        entries = entries.copy()
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def p(self) -> int:
        return self.entries.shape[0]


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _delimiter(format: str) -> str:
    if format not in _DELIMITERS:
        raise MalformedInputError(f"unknown format {format!r}, expected csv or tsv")
    return _DELIMITERS[format]


def _parse_delimited(
    path: str, delim: str
) -> tuple[np.ndarray, tuple[str, ...] | None]:
    """Shared rectangular-parse core; raises naming the bad row/column."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n\r") for line in fh]
    lines = [line for line in lines if line.strip() != ""]
    if not lines:
        raise MalformedInputError(f"{path}: file contains no data rows")

    columns: tuple[str, ...] | None = None
    first = [tok.strip() for tok in lines[0].split(delim)]
    if not _is_number(first[0]):
        columns = tuple(first)
        lines = lines[1:]
        if not lines:
            raise MalformedInputError(f"{path}: header only, no data rows")

    rows: list[list[float]] = []
    width: int | None = None
    for r, line in enumerate(lines, start=1):
        tokens = [tok.strip() for tok in line.split(delim)]
        if width is None:
            width = len(tokens)
        elif len(tokens) != width:
            raise MalformedInputError(
                f"{path}: row {r} has {len(tokens)} cells, expected {width}"
            )
        row = []
        for c, tok in enumerate(tokens, start=1):
            if tok == "":
                raise MalformedInputError(f"{path}: empty cell at row {r}, column {c}")
            try:
                row.append(float(tok))
            except ValueError:
                raise MalformedInputError(
                    f"{path}: non-numeric cell {tok!r} at row {r}, column {c}"
                ) from None
        rows.append(row)

    values = np.asarray(rows, dtype=np.float64)
    if columns is not None and len(columns) != values.shape[1]:
        raise MalformedInputError(
            f"{path}: header has {len(columns)} names for {values.shape[1]} columns"
        )
    return values, columns


def load_matrix(path: str, format: str = "csv") -> DataMatrix:
    """Read a delimited numeric observation matrix from ``path``.

    The first line is treated as a header when its first token is not
    numeric. Ragged rows, empty cells, and non-numeric cells raise
    :class:`MalformedInputError` naming the offending row and column;
    constant (zero sample variance) columns raise
    :class:`DegenerateDataError` naming the column.
    """
    values, columns = _parse_delimited(path, _delimiter(format))
    if values.shape[0] >= 2:
        variances = values.var(axis=0)
        dead = np.flatnonzero(variances == 0.0)
        if dead.size:
            raise DegenerateDataError(
                f"{path}: column {dead[0] + 1} is constant (zero sample variance)"
            )
    return DataMatrix(values, centered=False, columns=columns)


def load_covariance(path: str, format: str = "csv") -> CovarianceSpec:
    """Read a square symmetric matrix (no constant-column rule applies)."""
    values, _ = _parse_delimited(path, _delimiter(format))
    return CovarianceSpec(values)


def matrix_to_delimited(data: DataMatrix, format: str = "csv") -> str:
    """Render ``data`` as delimited text that round-trips values exactly."""
    delim = _delimiter(format)
    lines = []
    if data.columns is not None:
        lines.append(delim.join(data.columns))
    for row in data.values:
        lines.append(delim.join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_matrix(data: DataMatrix, path: str, format: str = "csv") -> None:
    """Write ``data`` as a delimited file that round-trips exactly."""
    text = matrix_to_delimited(data, format)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def center_columns(data: DataMatrix) -> DataMatrix:
    """Subtract each column's mean; a no-op on already-centered data."""
    if data.centered:
        return data
    centered = data.values - data.values.mean(axis=0, keepdims=True)
    # second pass removes the first pass's rounding residue, so column
    # means land at the roundoff of the centered scale, not the raw scale
    centered -= centered.mean(axis=0, keepdims=True)
    return DataMatrix(centered, centered=True, columns=data.columns)


def transform_null(data: DataMatrix, sigma0: CovarianceSpec) -> DataMatrix:
    """Map each row x to sigma0^{-1/2} x, reducing a sigma0 null to identity.

    The inverse square root is taken from the symmetric eigendecomposition,
    so the transform is itself symmetric. Raises
    :class:`InvalidCovarianceError` when sigma0 is not positive definite
    or its dimension does not match the data.
    """
    if sigma0.p != data.p:
        raise InvalidCovarianceError(
            f"sigma0 is {sigma0.p}x{sigma0.p} but data has p={data.p} columns"
        )
    eigvals, eigvecs = np.linalg.eigh(sigma0.entries)
    if eigvals[0] <= 0.0:
        raise InvalidCovarianceError(
            f"sigma0 is not positive definite (min eigenvalue {eigvals[0]:.6g})"
        )
    inv_root = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
    # rows transform as x^T S with S symmetric
    return DataMatrix(data.values @ inv_root, centered=data.centered,
                      columns=data.columns)
