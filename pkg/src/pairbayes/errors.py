"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems (bad parameters,
malformed files, invalid pairs, non-PD covariances) exit with 2, numeric
degeneracy (constant columns, collapsed splits) with 3.
"""


class PairBayesError(Exception):
    """Base class for all package-specific errors."""


class MalformedInputError(PairBayesError):
    """Input file could not be parsed into a rectangular numeric matrix."""


class DegenerateDataError(PairBayesError):
    """Data admits no meaningful answer (zero-variance column, collapsed split)."""


class InvalidCovarianceError(PairBayesError):
    """Covariance matrix is not symmetric positive definite where required."""


class InvalidPairError(PairBayesError):
    """Column pair is out of range or degenerate (i == j)."""


class InvalidParameterError(PairBayesError):
    """Parameter outside its documented domain."""
