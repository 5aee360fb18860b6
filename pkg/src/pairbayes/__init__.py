"""Maximum pairwise Bayes factor tests for high-dimensional covariances.

Given an n-by-p data matrix with p possibly much larger than n, every
column pair is scored with a closed-form Bayes factor and the maximum
score drives one-sample (identity), diagonality, and single-pair
independence tests, plus covariance support recovery with a
cross-validated threshold.
"""

from .bayesfactor import (
    LOG_BF_CAP,
    HyperParams,
    LogBF,
    default_hyperparams,
    log_bf_diag,
    log_bf_one_sample,
    resolve_for_shape,
)
from .dataio import (
    CovarianceSpec,
    DataMatrix,
    center_columns,
    load_covariance,
    load_matrix,
    matrix_to_delimited,
    save_matrix,
    transform_null,
)
from .errors import (
    DegenerateDataError,
    InvalidCovarianceError,
    InvalidPairError,
    InvalidParameterError,
    MalformedInputError,
    PairBayesError,
)
from .evalmetrics import RocCurve, ks_distance, mc_null_statistics, roc_curve
from .hyptest import (
    TestOutcome,
    c_np,
    diagonality_test,
    gumbel_cdf,
    gumbel_quantile,
    one_sample_test,
    pairwise_independence_test,
)
from .pairstats import (
    GramCache,
    build_gram,
    sample_correlation_sq,
    tau_i_sq,
    tau_ij_gamma_sq,
)
from .simulate import (
    CovModel,
    cov_banded_setting1,
    cov_banded_setting2,
    cov_compound_symmetry,
    cov_identity,
    cov_two_entry,
    ensure_pd,
    make_cov_model,
    replicate_seed,
    sample_mvn,
    save_covariance,
)
from .support import (
    Confusion,
    CVReport,
    SupportEstimate,
    confusion,
    cv_mse,
    cv_select_threshold,
    default_grid,
    error_count,
    make_splits,
    mcc,
    select_support,
)

__version__ = "0.1.0"

__all__ = [
    "LOG_BF_CAP",
    "HyperParams",
    "LogBF",
    "default_hyperparams",
    "log_bf_diag",
    "log_bf_one_sample",
    "resolve_for_shape",
    "CovarianceSpec",
    "DataMatrix",
    "center_columns",
    "load_covariance",
    "load_matrix",
    "matrix_to_delimited",
    "save_matrix",
    "transform_null",
    "PairBayesError",
    "MalformedInputError",
    "DegenerateDataError",
    "InvalidCovarianceError",
    "InvalidPairError",
    "InvalidParameterError",
    "RocCurve",
    "ks_distance",
    "mc_null_statistics",
    "roc_curve",
    "TestOutcome",
    "c_np",
    "diagonality_test",
    "gumbel_cdf",
    "gumbel_quantile",
    "one_sample_test",
    "pairwise_independence_test",
    "GramCache",
    "build_gram",
    "sample_correlation_sq",
    "tau_i_sq",
    "tau_ij_gamma_sq",
    "CovModel",
    "cov_banded_setting1",
    "cov_banded_setting2",
    "cov_compound_symmetry",
    "cov_identity",
    "cov_two_entry",
    "ensure_pd",
    "make_cov_model",
    "replicate_seed",
    "sample_mvn",
    "save_covariance",
    "Confusion",
    "CVReport",
    "SupportEstimate",
    "confusion",
    "cv_mse",
    "cv_select_threshold",
    "default_grid",
    "error_count",
    "make_splits",
    "mcc",
    "select_support",
]
