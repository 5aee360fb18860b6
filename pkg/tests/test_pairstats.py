import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pairbayes import (
    DataMatrix,
    DegenerateDataError,
    InvalidPairError,
    InvalidParameterError,
    build_gram,
    sample_correlation_sq,
    tau_i_sq,
    tau_ij_gamma_sq,
)


def cache_for(columns) -> tuple:
    x = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns])
    return build_gram(DataMatrix(x)), x


class TestBuildGram:
    def test_identity_columns(self):
        cache, _ = cache_for([[1.0, 0.0], [0.0, 1.0]])
        assert np.array_equal(cache.gram, np.eye(2))
        assert np.array_equal(cache.norms_sq, [1.0, 1.0])
        assert cache.n == 2 and cache.p == 2

    def test_hand_example(self):
        cache, _ = cache_for([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
        assert cache.gram[0, 1] == 6.0
        assert np.array_equal(cache.norms_sq, [14.0, 3.0])

    def test_duplicated_column(self):
        cache, _ = cache_for([[1.0, 2.0, -1.0], [1.0, 2.0, -1.0]])
        assert cache.gram[0, 1] == cache.norms_sq[0] == cache.norms_sq[1]

    def test_gram_exactly_symmetric(self):
        rng = np.random.default_rng(1)
        cache = build_gram(DataMatrix(rng.standard_normal((23, 7))))
        assert np.array_equal(cache.gram, cache.gram.T)
        assert np.array_equal(np.diag(cache.gram), cache.norms_sq)

    def test_zero_norm_column_rejected(self):
        with pytest.raises(DegenerateDataError, match="column 2"):
            cache_for([[1.0, 2.0], [0.0, 0.0]])

    def test_cauchy_schwarz(self):
        rng = np.random.default_rng(2)
        cache = build_gram(DataMatrix(rng.standard_normal((15, 6))))
        bound = cache.norms_sq[:, None] * cache.norms_sq[None, :]
        assert np.all(cache.gram ** 2 <= bound * (1.0 + 1e-10))

    def test_arrays_read_only(self):
        cache, _ = cache_for([[1.0, 2.0], [3.0, 1.0]])
        with pytest.raises(ValueError):
            cache.gram[0, 0] = 9.0


class TestTauISq:
    def test_hand_example(self):
        cache, _ = cache_for([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
        assert tau_i_sq(cache, 1) == pytest.approx(14.0 / 3.0, rel=1e-15)

    def test_unit_column(self):
        cache, _ = cache_for([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 1.0]])
        assert tau_i_sq(cache, 1) == pytest.approx(1.0 / 4.0)

    def test_quadratic_in_scale(self):
        base = [[1.0, -2.0, 0.5], [2.0, 1.0, 1.0]]
        cache, _ = cache_for(base)
        scaled, _ = cache_for([[3.0 * v for v in base[0]], base[1]])
        assert tau_i_sq(scaled, 1) == pytest.approx(9.0 * tau_i_sq(cache, 1), rel=1e-14)

    def test_index_out_of_range(self):
        cache, _ = cache_for([[1.0, 2.0], [3.0, 1.0]])
        for bad in (0, 3, -1):
            with pytest.raises(InvalidPairError):
                tau_i_sq(cache, bad)


class TestTauIjGammaSq:
    def test_orthogonal_equals_tau_i(self):
        cache, _ = cache_for([[1.0, 1.0], [1.0, -1.0]])
        for gamma in (0.0, 0.3, 5.0):
            assert tau_ij_gamma_sq(cache, 1, 2, gamma) == tau_i_sq(cache, 1)

    def test_identical_columns_gamma_zero(self):
        cache, _ = cache_for([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        assert tau_ij_gamma_sq(cache, 1, 2, 0.0) == 0.0

    def test_hand_example(self):
        cache, _ = cache_for([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
        assert tau_ij_gamma_sq(cache, 1, 2, 0.5) == pytest.approx(2.0, rel=1e-14)

    def test_same_index_rejected(self):
        cache, _ = cache_for([[1.0, 2.0], [3.0, 1.0]])
        with pytest.raises(InvalidPairError):
            tau_ij_gamma_sq(cache, 1, 1, 0.5)

    def test_negative_gamma_rejected(self):
        cache, _ = cache_for([[1.0, 2.0], [3.0, 1.0]])
        with pytest.raises(InvalidParameterError):
            tau_ij_gamma_sq(cache, 1, 2, -0.1)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(0, 2 ** 31 - 1),
        st.floats(0.0, 10.0),
        st.floats(0.0, 10.0),
    )
    def test_monotone_in_gamma_and_bounded(self, seed, g1, g2):
        rng = np.random.default_rng(seed)
        cache = build_gram(DataMatrix(rng.standard_normal((8, 3))))
        lo, hi = sorted((g1, g2))
        t_lo = tau_ij_gamma_sq(cache, 1, 2, lo)
        t_hi = tau_ij_gamma_sq(cache, 1, 2, hi)
        assert t_lo <= t_hi + 1e-15
        assert t_hi <= tau_i_sq(cache, 1) + 1e-15

    def test_lower_bound_fraction(self):
        # tau_ij^2 >= gamma/(1+gamma) * tau_i^2 since the projection term
        # is at most the full norm
        rng = np.random.default_rng(9)
        cache = build_gram(DataMatrix(rng.standard_normal((12, 4))))
        for gamma in (0.1, 1.0, 4.0):
            for i, j in ((1, 2), (3, 4), (2, 3)):
                assert tau_ij_gamma_sq(cache, i, j, gamma) >= (
                    gamma / (1.0 + gamma) * tau_i_sq(cache, i) * (1.0 - 1e-12)
                )

    def test_regression_sum_of_squares_nonnegative(self):
        rng = np.random.default_rng(10)
        cache = build_gram(DataMatrix(rng.standard_normal((10, 5))))
        for i in range(1, 6):
            for j in range(1, 6):
                if i != j:
                    diff = tau_i_sq(cache, i) - tau_ij_gamma_sq(cache, i, j, 0.0)
                    assert cache.n * diff >= -1e-12


class TestSampleCorrelationSq:
    def test_orthogonal(self):
        cache, _ = cache_for([[1.0, 1.0], [1.0, -1.0]])
        assert sample_correlation_sq(cache, 1, 2) == 0.0

    def test_collinear(self):
        cache, _ = cache_for([[1.0, 2.0, -1.5], [2.0, 4.0, -3.0]])
        assert sample_correlation_sq(cache, 1, 2) == pytest.approx(1.0, abs=1e-14)

    def test_hand_example(self):
        cache, _ = cache_for([[1.0, 2.0, 3.0], [1.0, 1.0, 1.0]])
        assert sample_correlation_sq(cache, 1, 2) == pytest.approx(6.0 / 7.0, rel=1e-14)

    def test_symmetric_in_pair(self):
        rng = np.random.default_rng(4)
        cache = build_gram(DataMatrix(rng.standard_normal((9, 4))))
        assert sample_correlation_sq(cache, 2, 3) == sample_correlation_sq(cache, 3, 2)

    def test_same_index_rejected(self):
        cache, _ = cache_for([[1.0, 2.0], [3.0, 1.0]])
        with pytest.raises(InvalidPairError):
            sample_correlation_sq(cache, 2, 2)


class TestGramPathMatchesRawColumns:
    def test_random_matrices(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            x = rng.standard_normal((50, 20))
            cache = build_gram(DataMatrix(x))
            pairs = [(1, 2), (7, 3), (20, 19), (5, 14)]
            for i, j in pairs:
                assert tau_i_sq(cache, i) == pytest.approx(
                    oracles.naive_tau_i_sq(x, i), rel=1e-10
                )
                for gamma in (0.0, 0.25, 2.0):
                    assert tau_ij_gamma_sq(cache, i, j, gamma) == pytest.approx(
                        oracles.naive_tau_ij_gamma_sq(x, i, j, gamma), rel=1e-10
                    )
                assert sample_correlation_sq(cache, i, j) == pytest.approx(
                    oracles.naive_rho_sq(x, i, j), rel=1e-10
                )
