import math

import numpy as np
import pytest

import oracles
from pairbayes import (
    DataMatrix,
    InvalidParameterError,
    Confusion,
    confusion,
    cov_two_entry,
    cv_mse,
    cv_select_threshold,
    default_grid,
    default_hyperparams,
    error_count,
    make_splits,
    mcc,
    sample_mvn,
    select_support,
)
from pairbayes.bayesfactor import LOG_BF_CAP, resolve_for_shape
from pairbayes.simulate import cov_banded_setting1
from pairbayes.support import _pair_scores


def correlated_pair_data(seed=0, n=60, p=4):
    """Columns 1 and 2 strongly correlated, the rest independent noise."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    x[:, 1] = x[:, 0] + 0.2 * rng.standard_normal(n)
    return DataMatrix(x)


class TestSelectSupport:
    def test_recovers_the_planted_pair(self):
        data = correlated_pair_data()
        hp = default_hyperparams(data.n, data.p, "support")
        est = select_support(data, hp, c_sel=0.0)
        assert est.pairs == ((1, 2),)
        assert est.threshold == 0.0
        assert est.symmetrized
        assert est.p == 4

    def test_pairs_are_sorted_upper_triangle(self):
        rng = np.random.default_rng(1)
        data = DataMatrix(rng.standard_normal((40, 8)))
        hp = default_hyperparams(40, 8, "support")
        est = select_support(data, hp, c_sel=-20.0)
        assert len(est.pairs) == 8 * 7 // 2  # very low threshold selects all
        assert all(i < j for i, j in est.pairs)
        assert est.pairs == tuple(sorted(est.pairs))

    def test_no_pair_beats_the_sentinel_cap(self):
        # scores never exceed 2 * LOG_BF_CAP, so that threshold empties
        # the support even for exactly collinear columns
        z = np.arange(1.0, 7.0)
        data = DataMatrix(np.column_stack([z, z, np.ones(6) + 0.1 * z]))
        hp = default_hyperparams(6, 3, "support", gamma=1e-16)
        est = select_support(data, hp, c_sel=2.0 * LOG_BF_CAP)
        assert est.pairs == ()

    def test_collinear_pair_selected_at_any_ordinary_threshold(self):
        z = np.arange(1.0, 7.0)
        rng = np.random.default_rng(2)
        data = DataMatrix(np.column_stack([z, z, rng.standard_normal(6)]))
        hp = default_hyperparams(6, 3, "support", gamma=1e-16)
        est = select_support(data, hp, c_sel=1e100)
        assert (1, 2) in est.pairs

    def test_threshold_monotone_superset(self):
        rng = np.random.default_rng(3)
        data = DataMatrix(rng.standard_normal((30, 6)))
        hp = default_hyperparams(30, 6, "support")
        loose = set(select_support(data, hp, c_sel=-5.0).pairs)
        tight = set(select_support(data, hp, c_sel=1.0).pairs)
        assert tight <= loose

    def test_symmetrize_flag_recorded(self):
        data = correlated_pair_data()
        hp = default_hyperparams(data.n, data.p, "support")
        est = select_support(data, hp, c_sel=0.0, symmetrize=False)
        assert not est.symmetrized
        assert est.pairs == ((1, 2),)

    def test_small_p_rejected(self):
        data = DataMatrix(np.arange(4.0)[:, None])
        hp = default_hyperparams(4, 1, "support")
        with pytest.raises(InvalidParameterError, match="p >= 2"):
            select_support(data, hp, c_sel=0.0)

    def test_serialization(self, tmp_path):
        data = correlated_pair_data()
        hp = default_hyperparams(data.n, data.p, "support")
        est = select_support(data, hp, c_sel=0.0)
        record = est.to_json_dict()
        assert record == {"threshold": 0.0, "symmetrized": True, "pairs": [[1, 2]]}
        assert est.edges_csv() == "i,j\n1,2\n"
        path = tmp_path / "edges.csv"
        est.save_edges(str(path))
        assert path.read_text() == "i,j\n1,2\n"

    def test_threads_do_not_change_selection(self):
        rng = np.random.default_rng(4)
        data = DataMatrix(rng.standard_normal((25, 12)))
        hp = default_hyperparams(25, 12, "support")
        a = select_support(data, hp, c_sel=-1.0, threads=1)
        b = select_support(data, hp, c_sel=-1.0, threads=6)
        assert a.pairs == b.pairs

    def test_monte_carlo_exact_recovery(self):
        spec = cov_two_entry(10, 0.9)
        hp = default_hyperparams(100, 10, "support")
        exact = 0
        for r in range(100):
            data = sample_mvn(spec, 100, seed=700 + r)
            if select_support(data, hp, c_sel=0.0).pairs == ((1, 2),):
                exact += 1
        assert exact >= 95


class TestConfusionAndScores:
    def test_confusion_counts(self):
        from pairbayes import SupportEstimate

        truth = cov_two_entry(4, 0.5)
        est = SupportEstimate(pairs=((1, 2), (2, 3)), threshold=0.0, symmetrized=True, p=4)
        conf = confusion(est, truth)
        assert (conf.tp, conf.fp, conf.fn, conf.tn) == (1, 1, 0, 4)
        assert error_count(conf) == 1

    def test_dimension_mismatch(self):
        from pairbayes import SupportEstimate

        est = SupportEstimate(pairs=(), threshold=0.0, symmetrized=True, p=5)
        with pytest.raises(InvalidParameterError, match="p = 5"):
            confusion(est, cov_two_entry(4, 0.5))

    def test_mcc_hand_value(self):
        assert mcc(3, 4, 1, 2) == pytest.approx(10.0 / math.sqrt(600.0), rel=1e-15)
        assert mcc(3, 4, 1, 2) == pytest.approx(0.4082482904638631, abs=1e-15)

    def test_mcc_extremes(self):
        assert mcc(5, 7, 0, 0) == 1.0
        assert mcc(0, 0, 4, 6) == pytest.approx(-1.0)
        assert mcc(0, 10, 0, 0) == 0.0
        assert mcc(0, 0, 0, 0) == 0.0

    def test_mcc_validation(self):
        with pytest.raises(InvalidParameterError, match="tn"):
            mcc(1, -1, 0, 0)

    def test_error_count(self):
        assert error_count(Confusion(tp=3, fp=1, fn=2, tn=4)) == 3
        assert error_count(Confusion(tp=0, fp=0, fn=0, tn=6)) == 0


class TestMakeSplits:
    def test_shapes_and_partition(self):
        splits = make_splits(10, 5, seed=0)
        assert len(splits) == 5
        for test, train in splits:
            assert len(test) == 4  # ceil(10/3)
            assert len(train) == 6
            assert np.array_equal(np.sort(np.concatenate([test, train])), np.arange(10))
            assert np.array_equal(test, np.sort(test))

    def test_deterministic_and_prefix_stable(self):
        a = make_splits(12, 6, seed=9)
        b = make_splits(12, 6, seed=9)
        c = make_splits(12, 3, seed=9)
        for (t1, r1), (t2, r2) in zip(a, b):
            assert np.array_equal(t1, t2) and np.array_equal(r1, r2)
        for (t1, r1), (t2, r2) in zip(a[:3], c):
            assert np.array_equal(t1, t2)

    def test_seed_matters(self):
        a = make_splits(30, 1, seed=1)[0][0]
        b = make_splits(30, 1, seed=2)[0][0]
        assert not np.array_equal(a, b)

    def test_too_few_rows(self):
        with pytest.raises(InvalidParameterError, match="fewer than 3 training rows"):
            make_splits(4, 5, seed=0)
        make_splits(5, 5, seed=0)

    def test_nsplits_validation(self):
        with pytest.raises(InvalidParameterError, match="nsplits"):
            make_splits(10, 0, seed=0)


class TestCvMse:
    def hand_data(self):
        # test rows 0-1 are the worked example; training rows make the
        # (1, 2) pair the only selection at threshold 0
        test_block = np.array([[1.0, 1.0], [2.0, 1.0]])
        rng = np.random.default_rng(5)
        z = rng.standard_normal(6)
        train_block = np.column_stack([z, z + 0.01 * rng.standard_normal(6)])
        return DataMatrix(np.vstack([test_block, train_block]))

    def test_hand_example(self):
        # column 1 regressed on column 2: rss = 5 - 9/2, column 2 on
        # column 1: rss = 2 - 9/5; total (0.5 + 0.2) / (n1 - 1) = 0.7
        data = self.hand_data()
        hp = default_hyperparams(data.n, 2, "support", gamma=0.1)
        split = (np.array([0, 1]), np.arange(2, 8))
        assert cv_mse(data, hp, 0.0, split) == pytest.approx(0.7, rel=1e-12)

    def test_empty_selection_uses_test_mean_square(self):
        data = self.hand_data()
        hp = default_hyperparams(data.n, 2, "support", gamma=0.1)
        split = (np.array([0, 1]), np.arange(2, 8))
        x1 = data.values[:2]
        expect = float((x1 ** 2).sum() / (2 - 1))
        assert cv_mse(data, hp, 1e6, split) == pytest.approx(expect, rel=1e-14)

    def test_matches_brute_force_both_fit_modes(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((15, 5))
        x[:, 2] = x[:, 0] + 0.5 * rng.standard_normal(15)
        data = DataMatrix(x)
        hp = default_hyperparams(15, 5, "support", gamma=0.1)
        test_idx = np.array([0, 3, 7, 11, 14])
        train_idx = np.setdiff1d(np.arange(15), test_idx)
        train = DataMatrix(x[train_idx])
        scores = _pair_scores(train, resolve_for_shape(hp, train.n, train.p))
        scores = np.maximum(scores, scores.T)
        for c in (-3.0, 0.0, 2.0):
            sets = [set(np.flatnonzero(scores[:, j] > c)) for j in range(5)]
            for mode in ("test", "train"):
                expect = oracles.cv_mse_brute(x, test_idx, train_idx, sets, mode)
                got = cv_mse(data, hp, c, (test_idx, train_idx), fit_beta_on=mode)
                assert got == pytest.approx(expect, rel=1e-11), (c, mode)

    def test_piecewise_constant_between_scores(self):
        rng = np.random.default_rng(7)
        data = DataMatrix(rng.standard_normal((12, 4)))
        hp = default_hyperparams(12, 4, "support", gamma=0.1)
        split = (np.arange(4), np.arange(4, 12))
        train = DataMatrix(data.values[4:])
        scores = _pair_scores(train, resolve_for_shape(hp, 8, 4))
        scores = np.maximum(scores, scores.T)
        vals = np.unique(scores[np.isfinite(scores)])
        mid = 0.5 * (vals[0] + vals[1])
        lo = cv_mse(data, hp, vals[0] + 1e-9, split)
        hi = cv_mse(data, hp, mid, split)
        assert lo == hi

    def test_split_validation(self):
        data = self.hand_data()
        hp = default_hyperparams(data.n, 2, "support", gamma=0.1)
        with pytest.raises(InvalidParameterError, match="partition"):
            cv_mse(data, hp, 0.0, (np.array([0, 1]), np.arange(1, 8)))
        with pytest.raises(InvalidParameterError, match="test"):
            cv_mse(data, hp, 0.0, (np.array([0]), np.arange(1, 8)))
        with pytest.raises(InvalidParameterError, match="fit_beta_on"):
            cv_mse(data, hp, 0.0, (np.array([0, 1]), np.arange(2, 8)), fit_beta_on="all")


class TestCvSelectThreshold:
    def test_report_shape_and_determinism(self):
        data = correlated_pair_data(seed=8, n=30, p=5)
        hp = default_hyperparams(30, 5, "support")
        grid = default_grid(-2.0, 2.0, 0.5)
        a = cv_select_threshold(data, hp, grid=grid, nsplits=8, seed=3)
        b = cv_select_threshold(data, hp, grid=grid, nsplits=8, seed=3)
        assert a == b
        assert len(a.grid) == len(a.mean_mse) == 9
        assert a.chosen in a.grid
        assert a.n1 == 10
        assert a.nsplits == 8 and a.seed == 3
        assert a.to_json_dict()["fit_beta_on"] == "test"

    def test_ties_pick_the_smallest_grid_value(self):
        # thresholds far above every score all select nothing, so the
        # mean MSE is flat and the first grid point must win
        rng = np.random.default_rng(9)
        data = DataMatrix(rng.standard_normal((24, 4)))
        hp = default_hyperparams(24, 4, "support")
        report = cv_select_threshold(
            data, hp, grid=np.array([1e5, 2e5, 3e5]), nsplits=4, seed=0
        )
        assert report.mean_mse[0] == report.mean_mse[1] == report.mean_mse[2]
        assert report.chosen == 1e5

    def test_grid_validation(self):
        data = correlated_pair_data(seed=10, n=18, p=3)
        hp = default_hyperparams(18, 3, "support")
        with pytest.raises(InvalidParameterError, match="empty"):
            cv_select_threshold(data, hp, grid=np.array([]))
        with pytest.raises(InvalidParameterError, match="increasing"):
            cv_select_threshold(data, hp, grid=np.array([1.0, 1.0, 2.0]))
        with pytest.raises(InvalidParameterError, match="increasing"):
            cv_select_threshold(data, hp, grid=np.array([0.0, np.inf]))

    def test_threads_do_not_change_the_report(self):
        data = correlated_pair_data(seed=11, n=27, p=6)
        hp = default_hyperparams(27, 6, "support")
        grid = default_grid(-3.0, 3.0, 1.0)
        a = cv_select_threshold(data, hp, grid=grid, nsplits=5, seed=1, threads=1)
        b = cv_select_threshold(data, hp, grid=grid, nsplits=5, seed=1, threads=7)
        assert a.mean_mse == b.mean_mse and a.chosen == b.chosen

    def test_fit_modes_recorded_and_distinct(self):
        data = correlated_pair_data(seed=12, n=30, p=5)
        hp = default_hyperparams(30, 5, "support")
        grid = default_grid(-2.0, 2.0, 1.0)
        on_test = cv_select_threshold(data, hp, grid=grid, nsplits=6, seed=2)
        on_train = cv_select_threshold(
            data, hp, grid=grid, nsplits=6, seed=2, fit_beta_on="train"
        )
        assert on_test.fit_beta_on == "test" and on_train.fit_beta_on == "train"
        assert on_test.mean_mse != on_train.mean_mse

    def test_chosen_threshold_is_near_the_grid_optimum(self):
        # end to end on a banded model: the CV choice should score close
        # to the best grid threshold in MCC against the true support
        model = cov_banded_setting1(100)
        data = sample_mvn(model.spec, 100, seed=2718)
        hp = default_hyperparams(100, 100, "support")
        report = cv_select_threshold(data, hp, nsplits=20, seed=5)
        grid = report.grid

        def mcc_at(c):
            est = select_support(data, hp, c_sel=c)
            conf = confusion(est, model.spec)
            return mcc(conf.tp, conf.tn, conf.fp, conf.fn)

        best = max(mcc_at(c) for c in grid[:: 5])
        chosen_mcc = mcc_at(report.chosen)
        assert chosen_mcc >= best - 0.1
        assert chosen_mcc >= 0.6


class TestDefaultGrid:
    def test_default_span(self):
        grid = default_grid()
        assert grid[0] == -7.0 and grid[-1] == 10.0
        assert len(grid) == 86
        assert np.allclose(np.diff(grid), 0.2)

    def test_custom_and_validation(self):
        assert np.array_equal(default_grid(0.0, 1.0, 0.5), np.array([0.0, 0.5, 1.0]))
        with pytest.raises(InvalidParameterError, match="step"):
            default_grid(0.0, 1.0, 0.0)
        with pytest.raises(InvalidParameterError, match="reversed"):
            default_grid(1.0, 0.0, 0.5)
