import numpy as np
import pytest

from clustcv.errors import InvalidArgumentError
from clustcv.kmeans import kmeans_fit, kmeans_fit_missing
from clustcv.matrix import DataMatrix
from clustcv.wold import plan_speckled, wold_cv_error, wold_select_k


def test_default_plan_partitions_grid():
    plan = plan_speckled(12, 5, folds=10, rng=0)
    allidx = np.concatenate(plan.holdout_sets)
    assert sorted(allidx.tolist()) == list(range(60))
    assert {len(s) for s in plan.holdout_sets} == {6}
    for f in range(plan.n_folds):
        m = plan.test_mask(f)
        assert not m.all(axis=1).any() and not m.all(axis=0).any()


def test_explicit_fraction_is_disjoint():
    plan = plan_speckled(20, 10, folds=3, holdout_fraction=0.2, rng=1)
    allidx = np.concatenate(plan.holdout_sets)
    assert len(allidx) == len(set(allidx.tolist())) == 120


@pytest.mark.parametrize("kw", [dict(folds=1), dict(folds=10, holdout_fraction=0.2),
                                dict(holdout_fraction=1.5), dict(holdout_fraction=0.0)])
def test_plan_argument_errors(kw):
    with pytest.raises(InvalidArgumentError):
        plan_speckled(10, 10, rng=0, **kw)


def test_plan_needs_two_rows_and_cols():
    with pytest.raises(InvalidArgumentError):
        plan_speckled(1, 10)


def test_permute_columns_moves_entries():
    plan = plan_speckled(4, 3, folds=2, rng=2)
    perm = np.array([2, 0, 1])
    moved = plan.permute_columns(perm)
    for f in range(2):
        np.testing.assert_array_equal(moved.test_mask(f)[:, np.argsort(perm)], plan.test_mask(f))


def test_all_observed_reduces_to_plain_kmeans():
    rng = np.random.default_rng(0)
    for seed in range(5):
        x = rng.standard_normal((25, 4))
        a = kmeans_fit(x, 3, rng=seed)
        b = kmeans_fit_missing(DataMatrix(x, np.ones_like(x, dtype=bool)), 3, rng=seed)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.centers, b.centers)


def test_constant_data_has_zero_error():
    x = np.full((10, 4), 3.0)
    plan = plan_speckled(10, 4, folds=5, rng=0)
    assert wold_cv_error(x, plan, 1, rng=0) == pytest.approx(0.0, abs=1e-24)


def test_cv_error_k1_hand_value():
    # two columns of noise-free row constants: k=1 predicts column means of the training entries
    x = np.tile([[0.0, 10.0]], (4, 1))
    x[:2] += 1.0
    plan = plan_speckled(4, 2, folds=2, rng=3)
    e = wold_cv_error(x, plan, 1, rng=0)
    want = []
    for f in range(2):
        test = plan.test_mask(f)
        pred = np.array([x[~test[:, j], j].mean() for j in range(2)])
        want.append(((x - pred)[test] ** 2).mean())
    assert e == pytest.approx(np.mean(want))


def test_selects_separated_clusters_with_missing():
    rng = np.random.default_rng(4)
    centers = np.outer([0.0, 6.0, 12.0], np.ones(5))
    x = centers[np.arange(60) % 3] + 0.5 * rng.standard_normal((60, 5))
    mask = rng.random(x.shape) > 0.1
    mask[:, 0] |= ~mask.any(axis=1)
    x[~mask] = np.nan
    rep = wold_select_k(DataMatrix(x, mask), range(1, 6), rng=0)
    assert rep.selected_k == 3
    assert rep.method == "wold"
    assert rep.errors.shape == (5, 10)


def test_threads_invariant():
    x = np.random.default_rng(5).standard_normal((20, 4))
    a = wold_select_k(x, range(1, 4), rng=1, threads=1)
    b = wold_select_k(x, range(1, 4), rng=1, threads=4)
    np.testing.assert_array_equal(a.errors, b.errors)


def test_plan_shape_mismatch():
    plan = plan_speckled(5, 5, folds=2, rng=0)
    with pytest.raises(InvalidArgumentError):
        wold_cv_error(np.zeros((6, 5)), plan, 1)
