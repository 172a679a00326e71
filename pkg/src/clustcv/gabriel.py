"""Gabriel (row-and-column holdout) cross-validation for choosing k.

Each fold holds out a block of test rows and a block of response columns.
k-means on the training responses defines clusters, a nearest-centroid
classifier on the training predictors learns to recover them, and the test
responses are predicted by the response center of the predicted cluster.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DegenerateCovarianceError, InvalidArgumentError
from .kmeans import KMeansParams, classifier_fit, classifier_predict_many, kmeans_fit
from .matrix import (
    DataMatrix,
    as_complete_values,
    haar_orthogonal,
    pooled_noise_covariance,
    symmetric_eig,
    whiten_transform,
)

DEFAULT_K_GRID = tuple(range(1, 11))


def seed_of(rng) -> Optional[int]:
    """The integer seed behind ``rng`` when one was given, else None."""
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    return None


@dataclass(frozen=True)
class FoldView:
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray


@dataclass(frozen=True)
class FoldPlan:
    """Random partition of rows into K test subsets and columns into L response subsets."""

    row_subsets: tuple
    col_subsets: tuple

    @property
    def n_rows(self) -> int:
        return sum(len(s) for s in self.row_subsets)

    @property
    def n_cols(self) -> int:
        return sum(len(s) for s in self.col_subsets)

    @property
    def folds(self) -> list:
        return [(r, s) for r in range(len(self.row_subsets)) for s in range(len(self.col_subsets))]

    def min_train_rows(self) -> int:
        return self.n_rows - max(len(s) for s in self.row_subsets)

    def view(self, x: np.ndarray, r: int, s: int) -> FoldView:
        test = np.zeros(self.n_rows, dtype=bool)
        test[self.row_subsets[r]] = True
        resp = np.zeros(self.n_cols, dtype=bool)
        resp[self.col_subsets[s]] = True
        train_rows, test_rows = x[~test], x[test]
        return FoldView(
            train_rows[:, ~resp], train_rows[:, resp], test_rows[:, ~resp], test_rows[:, resp]
        )


def _balanced_split(n: int, parts: int, rng) -> tuple:
    perm = rng.permutation(n)
    return tuple(np.sort(chunk) for chunk in np.array_split(perm, parts))


def plan_folds(n_rows: int, n_cols: int, K: int = 5, L: int = 2, rng=None) -> FoldPlan:
    if K < 2 or L < 2:
        raise InvalidArgumentError("need at least 2 row folds and 2 column folds")
    if K > n_rows:
        raise InvalidArgumentError(f"{K} row folds requested for {n_rows} rows")
    if L > n_cols:
        raise InvalidArgumentError(f"{L} column folds requested for {n_cols} columns")
    rng = np.random.default_rng(rng)
    rows = _balanced_split(n_rows, K, rng)
    cols = _balanced_split(n_cols, L, rng)
    return FoldPlan(rows, cols)


def fold_cv_error(view: FoldView, k: int, params: Optional[KMeansParams] = None, rng=None) -> float:
    """Mean squared prediction error of the test responses for one fold."""
    params = params or KMeansParams()
    n = view.y_train.shape[0]
    if k < 1 or k > n:
        raise InvalidArgumentError(f"k={k} needs 1 <= k <= {n} training rows")
    rng = np.random.default_rng(rng)
    km = kmeans_fit(view.y_train, k, params.restarts, params.max_iter, rng)
    clf = classifier_fit(view.x_train, km.labels, k)
    pred = classifier_predict_many(clf, view.x_test, rng)
    resid = view.y_test - km.centers[pred]
    return float(np.mean(np.einsum("ij,ij->i", resid, resid)))


@dataclass(frozen=True)
class CvReport:
    """Cross-validation errors per (k, fold) and the resulting choice of k.

    ``errors[i, j]`` is the error for ``k_grid[i]`` on ``folds[j]``.
    """

    k_grid: tuple
    folds: tuple
    errors: np.ndarray
    method: str = "gabriel"
    corrected: bool = False
    seed: Optional[int] = None
    warnings: tuple = ()

    def __post_init__(self):
        errors = np.asarray(self.errors, dtype=float)
        if errors.shape != (len(self.k_grid), len(self.folds)):
            raise InvalidArgumentError("errors shape must be (len(k_grid), len(folds))")
        errors.setflags(write=False)
        object.__setattr__(self, "errors", errors)
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "folds", tuple(tuple(int(v) for v in f) for f in self.folds))

    @property
    def mean_error(self) -> dict:
        # fsum is exactly rounded, so the mean ignores fold order
        n = len(self.folds)
        return {k: math.fsum(row) / n for k, row in zip(self.k_grid, self.errors)}

    @property
    def selected_k(self) -> int:
        means = self.mean_error
        best = min(means.values())
        return min(k for k, v in means.items() if v == best)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "corrected": self.corrected,
            "seed": self.seed,
            "selected_k": self.selected_k,
            "k_grid": list(self.k_grid),
            "folds": [list(f) for f in self.folds],
            "mean_error": {str(k): v for k, v in self.mean_error.items()},
            "errors": self.errors.tolist(),
            "warnings": list(self.warnings),
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "CvReport":
        d = json.loads(text)
        return cls(
            tuple(d["k_grid"]),
            tuple(tuple(f) for f in d["folds"]),
            np.asarray(d["errors"], dtype=float),
            d.get("method", "gabriel"),
            bool(d.get("corrected", False)),
            d.get("seed"),
            tuple(d.get("warnings", ())),
        )

    def to_csv(self) -> str:
        """Long format: one line per (k, fold)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "fold_r", "fold_s", "cv_error"])
        for k, row in zip(self.k_grid, self.errors):
            for (r, s), e in zip(self.folds, row):
                w.writerow([k, r, s, f"{e:.6g}"])
        return buf.getvalue()


def _check_grid(k_grid) -> tuple:
    k_grid = tuple(int(k) for k in k_grid)
    if not k_grid or min(k_grid) < 1:
        raise InvalidArgumentError("k_grid must be a non-empty set of positive integers")
    if len(set(k_grid)) != len(k_grid):
        raise InvalidArgumentError("k_grid has duplicates")
    return k_grid


def run_tasks(fn, tasks, threads: int = 1) -> list:
    """Evaluate ``fn`` over ``tasks``; results come back in task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def gabriel_select_k(
    data,
    k_grid: Sequence[int] = DEFAULT_K_GRID,
    K: int = 5,
    L: int = 2,
    params: Optional[KMeansParams] = None,
    rng=None,
    fold_limit: Optional[int] = None,
    threads: int = 1,
) -> CvReport:
    """Average the per-fold CV error over all K x L folds and pick the minimizing k.

    ``fold_limit`` evaluates only the first folds of the plan (e.g. one fold
    of a 2 x 2 plan).  Each (fold, k) evaluation draws from its own stream
    derived from the base seed, so results do not depend on ``threads``.
    """
    x = as_complete_values(data)
    params = params or KMeansParams()
    k_grid = _check_grid(k_grid)
    seed = seed_of(rng)
    rng = np.random.default_rng(rng)
    plan = plan_folds(x.shape[0], x.shape[1], K, L, rng)
    if max(k_grid) > plan.min_train_rows():
        raise InvalidArgumentError(
            f"max k={max(k_grid)} exceeds the smallest training set ({plan.min_train_rows()} rows)"
        )
    base = int(rng.integers(2**63))
    folds = plan.folds if fold_limit is None else plan.folds[:fold_limit]
    views = [plan.view(x, r, s) for r, s in folds]

    def task(t):
        fi, ki = t
        k = k_grid[ki]
        return fold_cv_error(views[fi], k, params, np.random.default_rng([base, fi, k]))

    tasks = [(fi, ki) for ki in range(len(k_grid)) for fi in range(len(folds))]
    results = run_tasks(task, tasks, threads)
    errors = np.empty((len(k_grid), len(folds)))
    for (fi, ki), e in zip(tasks, results):
        errors[ki, fi] = e
    return CvReport(k_grid, tuple(folds), errors, "gabriel", False, seed)


class CorrectedSelection(NamedTuple):
    report0: CvReport
    report: CvReport
    sigma_hat: Optional[np.ndarray]


def gabriel_select_k_corrected(
    data,
    k_grid: Sequence[int] = DEFAULT_K_GRID,
    K: int = 5,
    L: int = 2,
    params: Optional[KMeansParams] = None,
    rng=None,
    fold_limit: Optional[int] = None,
    threads: int = 1,
    eps: float = 1e-12,
) -> CorrectedSelection:
    """Two-stage selection with the noise covariance whitened out.

    Stage one picks k0 on the raw data.  A full-data k-means with k0
    clusters gives the pooled within-cluster covariance; the data are
    whitened by it, rotated by a Haar-random orthogonal matrix, and k is
    re-selected on fresh folds.  When the covariance is degenerate the
    stage-one report is returned as final, flagged with a warning.
    """
    x = as_complete_values(data)
    params = params or KMeansParams()
    seed = seed_of(rng)
    rng = np.random.default_rng(rng)
    report0 = gabriel_select_k(x, k_grid, K, L, params, rng, fold_limit, threads)
    report0 = replace(report0, seed=seed)
    k0 = report0.selected_k
    if x.shape[0] <= k0:
        fallback = replace(report0, warnings=report0.warnings + ("degenerate-covariance",))
        return CorrectedSelection(report0, fallback, None)
    km = kmeans_fit(x, k0, params.restarts, params.max_iter, rng)
    sigma = pooled_noise_covariance(x, km.labels, k0)
    q = haar_orthogonal(x.shape[1], rng)
    try:
        xt = whiten_transform(x, symmetric_eig(sigma), q, eps)
    except DegenerateCovarianceError:
        fallback = replace(report0, warnings=report0.warnings + ("degenerate-covariance",))
        return CorrectedSelection(report0, fallback, sigma)
    report = gabriel_select_k(xt, k_grid, K, L, params, rng, fold_limit, threads)
    return CorrectedSelection(report0, replace(report, corrected=True, seed=seed), sigma)
