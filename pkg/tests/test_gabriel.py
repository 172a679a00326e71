import json

import numpy as np
import pytest

from clustcv.errors import InvalidArgumentError, UnsupportedError
from clustcv.gabriel import (
    CvReport,
    FoldView,
    fold_cv_error,
    gabriel_select_k,
    gabriel_select_k_corrected,
    plan_folds,
)
from clustcv.matrix import DataMatrix


def test_plan_partitions_rows_and_columns():
    plan = plan_folds(23, 7, 5, 2, rng=0)
    rows = np.concatenate(plan.row_subsets)
    cols = np.concatenate(plan.col_subsets)
    assert sorted(rows.tolist()) == list(range(23))
    assert sorted(cols.tolist()) == list(range(7))
    assert [len(r) for r in plan.row_subsets] == [5, 5, 5, 4, 4]
    assert len(plan.folds) == 10
    assert plan.min_train_rows() == 18


def test_plan_view_blocks():
    x = np.arange(40.0).reshape(10, 4)
    plan = plan_folds(10, 4, 2, 2, rng=1)
    v = plan.view(x, 0, 1)
    test_rows = plan.row_subsets[0]
    resp = plan.col_subsets[1]
    np.testing.assert_array_equal(v.y_test, x[np.ix_(test_rows, resp)])
    assert v.x_train.shape == (5, 2) and v.y_train.shape == (5, 2)


def test_plan_rejects_bad_sizes():
    with pytest.raises(InvalidArgumentError):
        plan_folds(3, 4, 5, 2)
    with pytest.raises(InvalidArgumentError):
        plan_folds(10, 1, 5, 2)


def test_fold_error_hand_example():
    # two training clusters in y at 0 and 10; x predicts them perfectly
    xtr = np.array([[0.0], [0.0], [5.0], [5.0]])
    ytr = np.array([[0.0], [0.0], [10.0], [10.0]])
    xte = np.array([[0.0], [5.0]])
    yte = np.array([[1.0], [12.0]])
    view = FoldView(xtr, ytr, xte, yte)
    assert fold_cv_error(view, 2, rng=0) == pytest.approx((1 + 4) / 2)
    # k=1 predicts the mean 5 for both
    assert fold_cv_error(view, 1, rng=0) == pytest.approx((16 + 49) / 2)


def test_cvreport_selection_and_ties():
    rep = CvReport((1, 2, 3), ((0, 0), (0, 1)), np.array([[3.0, 3.0], [1.0, 2.0], [2.0, 1.0]]))
    assert rep.mean_error == {1: 3.0, 2: 1.5, 3: 1.5}
    assert rep.selected_k == 2


def test_cvreport_mean_is_order_invariant():
    vals = np.array([[1e16, 1.0, -1e16, 1.0]])
    a = CvReport((1,), tuple((i, 0) for i in range(4)), vals)
    b = CvReport((1,), tuple((i, 0) for i in range(4)), vals[:, ::-1])
    assert a.mean_error == b.mean_error == {1: 0.5}


def test_cvreport_json_round_trip():
    rep = CvReport((1, 2), ((0, 0),), np.array([[0.5], [0.25]]), seed=4, warnings=("w",))
    back = CvReport.from_json(rep.to_json())
    np.testing.assert_array_equal(back.errors, rep.errors)
    assert back.k_grid == rep.k_grid and back.seed == 4 and back.warnings == ("w",)
    assert json.loads(rep.to_json())["selected_k"] == 2


def test_cvreport_csv():
    rep = CvReport((1, 2), ((0, 0), (0, 1)), np.array([[1.0, 2.0], [1 / 3, 0.0]]))
    lines = rep.to_csv().splitlines()
    assert lines[0] == "k,fold_r,fold_s,cv_error"
    assert lines[3] == "2,0,0,0.333333"
    assert len(lines) == 5


def test_cvreport_shape_check():
    with pytest.raises(InvalidArgumentError):
        CvReport((1, 2), ((0, 0),), np.zeros((1, 1)))


def test_select_separated_blobs():
    rng = np.random.default_rng(0)
    centers = np.outer([0.0, 8.0, 16.0], np.ones(6)) + rng.normal(size=(3, 6))
    x = centers[np.arange(150) % 3] + rng.standard_normal((150, 6))
    rep = gabriel_select_k(x, range(1, 7), rng=1)
    assert rep.selected_k == 3
    assert rep.errors.shape == (6, 10)


def test_threads_do_not_change_result():
    x = np.random.default_rng(3).standard_normal((60, 4))
    a = gabriel_select_k(x, range(1, 5), rng=2, threads=1)
    b = gabriel_select_k(x, range(1, 5), rng=2, threads=3)
    np.testing.assert_array_equal(a.errors, b.errors)


def test_select_errors():
    x = np.zeros((20, 4))
    with pytest.raises(InvalidArgumentError):
        gabriel_select_k(x, (0, 1))
    with pytest.raises(InvalidArgumentError):
        gabriel_select_k(x, (1, 1))
    with pytest.raises(InvalidArgumentError):
        gabriel_select_k(x, range(1, 40))
    d = DataMatrix(np.where(np.eye(20, 4) > 0, np.nan, 1.0), mask=np.eye(20, 4) == 0)
    with pytest.raises(UnsupportedError):
        gabriel_select_k(d)


def test_fold_limit():
    x = np.random.default_rng(1).standard_normal((40, 2))
    rep = gabriel_select_k(x, (1, 2), 2, 2, rng=0, fold_limit=1)
    assert rep.folds == ((0, 0),)


def test_corrected_reports_both_stages():
    rng = np.random.default_rng(6)
    # separated in every coordinate so any column split can predict
    centers = np.outer([0.0, 8.0, 16.0], np.ones(4)) + rng.normal(size=(3, 4))
    x = centers[np.arange(90) % 3] + rng.standard_normal((90, 4))
    res = gabriel_select_k_corrected(x, range(1, 6), rng=0)
    assert res.report0.selected_k == 3
    assert res.report.corrected and not res.report0.corrected
    assert res.sigma_hat.shape == (4, 4)
    again = gabriel_select_k_corrected(x, range(1, 6), rng=0)
    np.testing.assert_array_equal(res.report.errors, again.report.errors)


def test_corrected_degenerate_falls_back():
    x = np.repeat(np.array([[0.0, 0.0, 0.0, 0.0], [5.0, 5.0, 5.0, 5.0]]), 15, axis=0)
    res = gabriel_select_k_corrected(x, range(1, 4), rng=0)
    assert "degenerate-covariance" in res.report.warnings
    assert res.report.selected_k == res.report0.selected_k
