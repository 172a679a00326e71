"""k-means clustering, nearest-centroid classification and dispersion curves.

Complete-data and missing-data fits share one Lloyd core.  With no mask the
missing-data path performs exactly the same arithmetic as the complete-data
path, so the two agree label for label under equal seeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError, MissingClassError
from .matrix import DataMatrix, as_complete_values

# n * k * d elements above which distance evaluation is chunked over rows
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class KMeansParams:
    restarts: int = 10
    max_iter: int = 300

    def __post_init__(self):
        if self.restarts < 1:
            raise InvalidArgumentError("restarts must be >= 1")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")


@dataclass(frozen=True)
class KMeansModel:
    """Fitted centers (k x d), 0-based row labels and total within-cluster SS."""

    centers: np.ndarray
    labels: np.ndarray
    dispersion: float
    n_iter: int = 0
    converged: bool = True

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def to_json(self) -> str:
        return json.dumps(
            {
                "centers": self.centers.tolist(),
                "labels": self.labels.tolist(),
                "dispersion": self.dispersion,
                "n_iter": self.n_iter,
                "converged": self.converged,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "KMeansModel":
        d = json.loads(text)
        return cls(
            np.asarray(d["centers"], dtype=float),
            np.asarray(d["labels"], dtype=int),
            float(d["dispersion"]),
            int(d.get("n_iter", 0)),
            bool(d.get("converged", True)),
        )


def _sq_distances(x, w, scale, centers):
    """Squared distances (n x k); with a mask, observed coordinates only, rescaled."""
    n, d = x.shape
    k = centers.shape[0]
    out = np.empty((n, k))
    step = max(1, _CHUNK_ELEMENTS // max(1, k * d))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        diff = x[lo:hi, None, :] - centers[None, :, :]
        if w is not None:
            diff = diff * w[lo:hi, None, :]
        out[lo:hi] = np.einsum("ijk,ijk->ij", diff, diff)
    if scale is not None:
        out *= scale[:, None]
    return out


def _row_sq_distance(x, w, scale, c):
    diff = x - c
    if w is not None:
        diff = diff * w
    d2 = np.einsum("ij,ij->i", diff, diff)
    if scale is not None:
        d2 = d2 * scale
    return d2


def _assign(d2, prev=None):
    labels = np.argmin(d2, axis=1)
    if prev is not None:
        rows = np.arange(d2.shape[0])
        # keep the current label on ties so repaired clusters stay put
        keep = d2[rows, prev] <= d2[rows, labels]
        labels = np.where(keep, prev, labels)
    return labels


class _Problem:
    """Data prepared for the Lloyd core: filled values, weights, row scale."""

    def __init__(self, x, mask=None):
        self.x = x
        self.n, self.d = x.shape
        if mask is None:
            self.w = None
            self.scale = None
            self.col_means = None
        else:
            w = mask.astype(float)
            counts = w.sum(axis=0)
            self.col_means = np.where(mask, x, 0.0).sum(axis=0) / counts
            self.x = np.where(mask, x, self.col_means)
            self.w = w
            self.scale = self.d / w.sum(axis=1)

    def distances(self, centers):
        return _sq_distances(self.x, self.w, self.scale, centers)

    def centers(self, labels, k):
        onehot = np.zeros((k, self.n))
        onehot[labels, np.arange(self.n)] = 1.0
        if self.w is None:
            sums = onehot @ self.x
            counts = onehot.sum(axis=1)[:, None]
            return sums / np.maximum(counts, 1.0)
        sums = onehot @ (self.x * self.w)
        counts = onehot @ self.w
        with np.errstate(invalid="ignore", divide="ignore"):
            c = sums / counts
        return np.where(counts > 0, c, self.col_means)

    def plusplus(self, k, rng):
        x = self.x
        first = int(rng.integers(self.n))
        centers = np.empty((k, self.d))
        centers[0] = x[first]
        closest = _row_sq_distance(x, self.w, self.scale, x[first])
        for c in range(1, k):
            total = closest.sum()
            if total > 0:
                cum = np.cumsum(closest)
                idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
                idx = min(idx, self.n - 1)
                while closest[idx] <= 0 and idx > 0:
                    idx -= 1
            else:
                idx = int(rng.integers(self.n))
            centers[c] = x[idx]
            closest = np.minimum(closest, _row_sq_distance(x, self.w, self.scale, x[idx]))
        return centers

    def repair(self, labels, centers, k):
        """Reseed empty clusters from the point farthest from its own center."""
        counts = np.bincount(labels, minlength=k)
        if counts.min() > 0:
            return labels, centers
        labels = labels.copy()
        centers = centers.copy()
        rows = np.arange(self.n)
        own = self.distances(centers)[rows, labels]
        for j in np.flatnonzero(counts == 0):
            eligible = counts[labels] > 1
            i = int(np.argmax(np.where(eligible, own, -np.inf)))
            counts[labels[i]] -= 1
            labels[i] = j
            counts[j] = 1
            centers[j] = self.x[i]
            own[i] = 0.0
        return labels, centers

    def lloyd(self, k, max_iter, rng):
        centers = self.plusplus(k, rng)
        labels = _assign(self.distances(centers))
        converged = False
        n_iter = 0
        for n_iter in range(1, max_iter + 1):
            labels, centers = self.repair(labels, centers, k)
            centers = self.centers(labels, k)
            new = _assign(self.distances(centers), prev=labels)
            if np.array_equal(new, labels):
                converged = True
                break
            labels = new
        if not converged:
            labels, centers = self.repair(labels, centers, k)
            centers = self.centers(labels, k)
        d2 = self.distances(centers)
        dispersion = float(d2[np.arange(self.n), labels].sum())
        return KMeansModel(centers, labels, dispersion, n_iter, converged)


def _fit(problem, k, restarts, max_iter, rng):
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    if problem.n < k:
        raise InvalidArgumentError(f"need at least k={k} rows, got {problem.n}")
    params = KMeansParams(restarts, max_iter)
    rng = np.random.default_rng(rng)
    base = int(rng.integers(2**63))
    best = None
    # strict < keeps the lowest restart index on dispersion ties
    for r in range(params.restarts):
        model = problem.lloyd(k, params.max_iter, np.random.default_rng([base, r]))
        if best is None or model.dispersion < best.dispersion:
            best = model
    return best


def kmeans_fit(points, k: int, restarts: int = 10, max_iter: int = 300, rng=None) -> KMeansModel:
    """Best of ``restarts`` k-means++ seeded Lloyd runs on complete data."""
    x = as_complete_values(points)
    return _fit(_Problem(x), k, restarts, max_iter, rng)


def kmeans_fit_missing(data, k: int, restarts: int = 10, max_iter: int = 300, rng=None) -> KMeansModel:
    """k-means on partially observed data.

    Rows are assigned by squared distance over their observed coordinates,
    scaled by P / (number observed).  Each center coordinate is the mean of
    the observed entries in that column among the cluster's rows, falling
    back to the global column mean when the cluster observes none.
    """
    if not isinstance(data, DataMatrix):
        values = np.asarray(data, dtype=float)
        data = DataMatrix(values, ~np.isnan(values))
    if data.mask is None:
        return _fit(_Problem(np.array(data.values)), k, restarts, max_iter, rng)
    mask = data.mask
    if not mask.any(axis=1).all():
        raise InvalidArgumentError("a row has no observed entries")
    if not mask.any(axis=0).all():
        raise InvalidArgumentError("a column has no observed entries")
    return _fit(_Problem(np.array(data.values), mask), k, restarts, max_iter, rng)


@dataclass(frozen=True)
class CentroidClassifier:
    class_means: np.ndarray

    @property
    def k(self) -> int:
        return self.class_means.shape[0]


def classifier_fit(predictors, labels, k: Optional[int] = None) -> CentroidClassifier:
    """Per-class mean of the predictor rows; labels are 0-based class ids."""
    x = as_complete_values(predictors)
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (x.shape[0],):
        raise InvalidArgumentError("need one label per predictor row")
    if k is None:
        k = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= k:
        raise InvalidArgumentError(f"labels must lie in 0..{k - 1}")
    counts = np.bincount(labels, minlength=k)
    if counts.min() == 0:
        raise MissingClassError(np.flatnonzero(counts == 0))
    onehot = np.zeros((k, x.shape[0]))
    onehot[labels, np.arange(x.shape[0])] = 1.0
    return CentroidClassifier((onehot @ x) / counts[:, None])


def classifier_predict_many(model: CentroidClassifier, x, rng=None) -> np.ndarray:
    """Nearest class mean for each row; exact ties are broken uniformly at random."""
    x = as_complete_values(x)
    if x.shape[1] != model.class_means.shape[1]:
        raise InvalidArgumentError("predictor dimension does not match the classifier")
    d2 = _sq_distances(x, None, None, model.class_means)
    best = d2.min(axis=1, keepdims=True)
    tied = d2 == best
    pred = np.argmax(tied, axis=1)
    multi = np.flatnonzero(tied.sum(axis=1) > 1)
    if multi.size:
        rng = np.random.default_rng(rng)
        for i in multi:
            pred[i] = rng.choice(np.flatnonzero(tied[i]))
    return pred


def classifier_predict(model: CentroidClassifier, x, rng=None) -> int:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return int(classifier_predict_many(model, x, rng)[0])


@dataclass(frozen=True)
class DispersionCurve:
    ks: tuple
    dispersions: tuple
    # k values whose W_k exceeds W_{k-1}
    nonmonotone: tuple = field(default=())

    @property
    def points(self):
        return list(zip(self.ks, self.dispersions))


def dispersion_curve(points, k_max: int, restarts: int = 10, rng=None, max_iter: int = 300) -> DispersionCurve:
    """Within-cluster dispersion W_k for k = 1..k_max."""
    x = as_complete_values(points)
    if k_max < 1 or k_max > x.shape[0]:
        raise InvalidArgumentError(f"k_max must lie in 1..{x.shape[0]}")
    rng = np.random.default_rng(rng)
    base = int(rng.integers(2**63))
    ks, ws = [], []
    for k in range(1, k_max + 1):
        model = kmeans_fit(x, k, restarts, max_iter, np.random.default_rng([base, k]))
        ks.append(k)
        ws.append(model.dispersion)
    bad = tuple(ks[i] for i in range(1, len(ws)) if ws[i] > ws[i - 1])
    return DispersionCurve(tuple(ks), tuple(ws), bad)
