"""Wold (speckled holdout) cross-validation for choosing k.

Each fold hides a random scatter of individual entries, fits missing-data
k-means to what remains, and scores the hidden entries against the centers
of their rows' clusters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleConfigurationError, InvalidArgumentError
from .gabriel import DEFAULT_K_GRID, CvReport, _check_grid, run_tasks, seed_of
from .kmeans import KMeansParams, kmeans_fit_missing
from .matrix import DataMatrix


@dataclass(frozen=True)
class SpeckledPlan:
    """Disjoint held-out entry sets; entries are flat indices ``i * n_cols + j``."""

    n_rows: int
    n_cols: int
    holdout_sets: tuple
    holdout_fraction: float

    @property
    def n_folds(self) -> int:
        return len(self.holdout_sets)

    def test_mask(self, f: int) -> np.ndarray:
        m = np.zeros(self.n_rows * self.n_cols, dtype=bool)
        m[self.holdout_sets[f]] = True
        return m.reshape(self.n_rows, self.n_cols)

    def permute_columns(self, perm) -> "SpeckledPlan":
        """The same plan expressed for data whose columns are reordered by ``perm``."""
        perm = np.asarray(perm)
        inverse = np.argsort(perm)
        sets = []
        for s in self.holdout_sets:
            i, j = np.divmod(s, self.n_cols)
            sets.append(np.sort(i * self.n_cols + inverse[j]))
        return SpeckledPlan(self.n_rows, self.n_cols, tuple(sets), self.holdout_fraction)


def _covers_line(test: np.ndarray) -> bool:
    return bool(test.all(axis=1).any() or test.all(axis=0).any())


def plan_speckled(
    n_rows: int,
    n_cols: int,
    folds: int = 10,
    holdout_fraction: Optional[float] = None,
    rng=None,
    max_tries: int = 1000,
) -> SpeckledPlan:
    """Random disjoint holdout sets of about ``holdout_fraction * n_rows * n_cols`` entries.

    With ``holdout_fraction = 1 / folds`` (the default) the sets partition
    the whole grid.  Plans in which some fold hides an entire row or column
    are redrawn.
    """
    if folds < 2:
        raise InvalidArgumentError("need at least 2 folds")
    if holdout_fraction is None:
        holdout_fraction = 1.0 / folds
    if not 0 < holdout_fraction < 1:
        raise InvalidArgumentError("holdout_fraction must lie in (0, 1)")
    total = n_rows * n_cols
    if folds * holdout_fraction > 1 + 1e-9:
        raise InvalidArgumentError("folds * holdout_fraction exceeds 1; holdout sets cannot be disjoint")
    if n_rows < 2 or n_cols < 2:
        raise InvalidArgumentError("speckled holdout needs at least 2 rows and 2 columns")
    partition = abs(folds * holdout_fraction - 1) < 1e-9
    size = int(round(holdout_fraction * total))
    if size < 1:
        raise InvalidArgumentError("holdout_fraction leaves no entry to hold out")
    rng = np.random.default_rng(rng)
    for _ in range(max_tries):
        perm = rng.permutation(total)
        if partition:
            chunks = np.array_split(perm, folds)
        else:
            chunks = [perm[f * size:(f + 1) * size] for f in range(folds)]
        sets = tuple(np.sort(c) for c in chunks)
        plan = SpeckledPlan(n_rows, n_cols, sets, float(holdout_fraction))
        if not any(_covers_line(plan.test_mask(f)) for f in range(folds)):
            return plan
    raise InfeasibleConfigurationError("could not draw a plan that keeps every row and column observed")


def _as_datamatrix(data) -> DataMatrix:
    if isinstance(data, DataMatrix):
        return data
    values = np.asarray(data, dtype=float)
    return DataMatrix(values, ~np.isnan(values))


def _fold_error(data: DataMatrix, plan: SpeckledPlan, f: int, k: int, params: KMeansParams, rng) -> float:
    test = plan.test_mask(f)
    observed = data.observed()
    train = observed & ~test
    scored = observed & test
    model = kmeans_fit_missing(DataMatrix(data.values, train), k, params.restarts, params.max_iter, rng)
    if not scored.any():
        return 0.0
    pred = model.centers[model.labels]
    resid = (data.values - pred)[scored]
    return float(np.mean(resid * resid))


def _check(data: DataMatrix, plan: SpeckledPlan, k: int):
    if plan.n_rows != data.n_rows or plan.n_cols != data.n_cols:
        raise InvalidArgumentError("plan dimensions do not match the data")
    if k < 1 or k > data.n_rows:
        raise InvalidArgumentError(f"k={k} must lie in 1..{data.n_rows}")


def wold_cv_error(data, plan: SpeckledPlan, k: int, params: Optional[KMeansParams] = None, rng=None) -> float:
    """Mean over folds of the mean squared error on held-out entries."""
    data = _as_datamatrix(data)
    params = params or KMeansParams()
    _check(data, plan, k)
    rng = np.random.default_rng(rng)
    base = int(rng.integers(2**63))
    errs = [
        _fold_error(data, plan, f, k, params, np.random.default_rng([base, f, k]))
        for f in range(plan.n_folds)
    ]
    return float(np.mean(errs))


def wold_select_k(
    data,
    k_grid: Sequence[int] = DEFAULT_K_GRID,
    plan: Optional[SpeckledPlan] = None,
    params: Optional[KMeansParams] = None,
    rng=None,
    folds: int = 10,
    holdout_fraction: Optional[float] = None,
    threads: int = 1,
) -> CvReport:
    """Speckled cross-validation over ``k_grid``; ties go to the smallest k."""
    data = _as_datamatrix(data)
    params = params or KMeansParams()
    k_grid = _check_grid(k_grid)
    seed = seed_of(rng)
    rng = np.random.default_rng(rng)
    if plan is None:
        plan = plan_speckled(data.n_rows, data.n_cols, folds, holdout_fraction, rng)
    for k in k_grid:
        _check(data, plan, k)
    base = int(rng.integers(2**63))

    def task(t):
        f, ki = t
        k = k_grid[ki]
        return _fold_error(data, plan, f, k, params, np.random.default_rng([base, f, k]))

    tasks = [(f, ki) for ki in range(len(k_grid)) for f in range(plan.n_folds)]
    results = run_tasks(task, tasks, threads)
    errors = np.empty((len(k_grid), plan.n_folds))
    for (f, ki), e in zip(tasks, results):
        errors[ki, f] = e
    folds_meta = tuple((f, 0) for f in range(plan.n_folds))
    return CvReport(k_grid, folds_meta, errors, "wold", False, seed)
