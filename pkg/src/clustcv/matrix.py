"""Data container, noise covariance, eigendecomposition and whitening."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateCovarianceError, InvalidArgumentError, UnsupportedError

NA_TOKEN = "NA"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """An N x P observation matrix with an optional observed-entry mask.

    ``mask[i, j]`` is True when entry (i, j) is observed.  Values at
    unobserved positions are stored as NaN and never read.
    """

    values: np.ndarray
    mask: Optional[np.ndarray] = None
    row_ids: Optional[tuple] = None
    col_ids: Optional[tuple] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidArgumentError(f"need a non-empty 2-d matrix, got shape {values.shape}")
        mask = self.mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != values.shape:
                raise InvalidArgumentError("mask shape does not match values")
            if mask.all():
                mask = None
        observed = values if mask is None else values[mask]
        if not np.all(np.isfinite(observed)):
            raise InvalidArgumentError("observed entries must be finite")
        if mask is not None:
            values = np.where(mask, values, np.nan)
        for name, ids, size in (("row_ids", self.row_ids, values.shape[0]),
                                ("col_ids", self.col_ids, values.shape[1])):
            if ids is not None and len(ids) != size:
                raise InvalidArgumentError(f"{name} has {len(ids)} labels, expected {size}")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "mask", None if mask is None else _readonly(mask))
        if self.row_ids is not None:
            object.__setattr__(self, "row_ids", tuple(self.row_ids))
        if self.col_ids is not None:
            object.__setattr__(self, "col_ids", tuple(self.col_ids))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def has_missing(self) -> bool:
        return self.mask is not None

    def observed(self) -> np.ndarray:
        """Boolean observed-entry mask, materialized even when nothing is missing."""
        if self.mask is None:
            return np.ones(self.shape, dtype=bool)
        return self.mask

    def with_values(self, values: np.ndarray) -> "DataMatrix":
        return DataMatrix(values, self.mask, self.row_ids, None)

    @classmethod
    def from_csv(cls, source, header: Optional[bool] = None) -> "DataMatrix":
        """Read comma-separated values; ``NA`` marks a missing entry.

        With ``header=None`` the first line is treated as a header when any
        of its cells is neither numeric nor ``NA``.
        """
        if isinstance(source, (str, Path)):
            with open(source, newline="") as fh:
                rows = [r for r in csv.reader(fh)]
        else:
            rows = [r for r in csv.reader(source)]
        rows = [r for r in rows if r and any(c.strip() for c in r)]
        if not rows:
            raise InvalidArgumentError("empty CSV input")

        def numeric(cell):
            cell = cell.strip()
            if cell == NA_TOKEN:
                return True
            try:
                float(cell)
            except ValueError:
                return False
            return True

        if header is None:
            header = not all(numeric(c) for c in rows[0])
        col_ids = None
        if header:
            col_ids = tuple(c.strip() for c in rows[0])
            rows = rows[1:]
        if not rows:
            raise InvalidArgumentError("CSV has a header but no data rows")
        width = len(col_ids) if col_ids is not None else len(rows[0])
        values = np.empty((len(rows), width))
        mask = np.ones((len(rows), width), dtype=bool)
        for i, row in enumerate(rows):
            if len(row) != width:
                raise InvalidArgumentError(
                    f"ragged CSV: line {i + 1 + bool(header)} has {len(row)} fields, expected {width}"
                )
            for j, cell in enumerate(row):
                cell = cell.strip()
                if cell == NA_TOKEN:
                    mask[i, j] = False
                    values[i, j] = np.nan
                    continue
                try:
                    values[i, j] = float(cell)
                except ValueError:
                    raise InvalidArgumentError(
                        f"non-numeric cell {cell!r} at line {i + 1 + bool(header)}, column {j + 1}"
                    ) from None
        return cls(values, mask, None, col_ids)

    def to_csv(self, target=None, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.col_ids or [f"x{j + 1}" for j in range(self.n_cols)])
        obs = self.observed()
        for i in range(self.n_rows):
            w.writerow(repr(float(v)) if o else NA_TOKEN for v, o in zip(self.values[i], obs[i]))
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def as_complete_values(data) -> np.ndarray:
    """Plain float array for ops that cannot handle missing entries."""
    if isinstance(data, DataMatrix):
        if data.has_missing:
            raise UnsupportedError("operation does not support missing entries")
        return data.values
    values = np.asarray(data, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if np.isnan(values).any():
        raise UnsupportedError("operation does not support missing entries")
    return values


@dataclass(frozen=True)
class SymmetricEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def pooled_noise_covariance(data, labels: Sequence[int], k: int) -> np.ndarray:
    """Within-cluster covariance pooled over clusters with an N - k denominator.

    ``labels`` are cluster ids in ``0..k-1``.
    """
    x = as_complete_values(data)
    n = x.shape[0]
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (n,):
        raise InvalidArgumentError("need one label per row")
    if k < 1 or n <= k:
        raise InvalidArgumentError(f"need N > k for the N - k denominator (N={n}, k={k})")
    if labels.min() < 0 or labels.max() >= k:
        raise InvalidArgumentError(f"labels must lie in 0..{k - 1}")
    counts = np.bincount(labels, minlength=k)
    sums = np.zeros((k, x.shape[1]))
    np.add.at(sums, labels, x)
    means = sums / np.maximum(counts, 1)[:, None]
    resid = x - means[labels]
    cov = resid.T @ resid / (n - k)
    return (cov + cov.T) / 2


def symmetric_eig(m, atol: float = 1e-10) -> SymmetricEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues non-increasing."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"need a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=0.0, atol=atol):
        raise InvalidArgumentError("matrix is not symmetric")
    w, v = np.linalg.eigh((m + m.T) / 2)
    order = np.argsort(w, kind="stable")[::-1]
    return SymmetricEig(_readonly(w[order]), _readonly(v[:, order]))


def haar_orthogonal(p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a p x p orthogonal matrix from the Haar measure.

    QR of a standard Gaussian matrix, with the columns of Q multiplied by
    the signs of diag(R) so the factorization is unique.
    """
    if p < 1:
        raise InvalidArgumentError("dimension must be positive")
    z = rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def whiten_transform(data, eig: SymmetricEig, q: np.ndarray, eps: float = 1e-12):
    """Return ``X @ V @ diag(lam)^(-1/2) @ q`` with small eigenvalues floored.

    Eigenvalues below ``eps * max(lam)`` are replaced by that floor.
    Returns the same type as ``data`` (DataMatrix or ndarray).
    """
    x = as_complete_values(data)
    lam = np.asarray(eig.eigenvalues, dtype=float)
    vecs = np.asarray(eig.eigenvectors, dtype=float)
    q = np.asarray(q, dtype=float)
    p = x.shape[1]
    if lam.shape != (p,) or vecs.shape != (p, p) or q.shape != (p, p):
        raise InvalidArgumentError("eigendecomposition / rotation dimension does not match data")
    top = lam.max()
    if not top > 0 or not math.isfinite(top):
        raise DegenerateCovarianceError("all eigenvalues are non-positive")
    floor = eps * top
    lam = np.where(lam < floor, floor, lam)
    out = (x @ vecs) / np.sqrt(lam) @ q
    if isinstance(data, DataMatrix):
        return DataMatrix(out, None, data.row_ids, None)
    return out
