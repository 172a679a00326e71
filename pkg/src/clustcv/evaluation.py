"""Summaries of selection results: Wilson intervals, confusion matrices, enrichment."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln, ndtri

from .errors import InvalidArgumentError


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise InvalidArgumentError("need 0 <= successes <= trials")
    if not 0 < confidence < 1:
        raise InvalidArgumentError("confidence must lie in (0, 1)")
    z = float(ndtri(0.5 + confidence / 2))
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high


@dataclass(frozen=True)
class SelectionRow:
    method: str
    setting: str
    param: object
    correct: int
    total: int
    wilson_low: float
    wilson_high: float

    @property
    def proportion(self) -> float:
        return self.correct / self.total if self.total else float("nan")


SUMMARY_COLUMNS = ("method", "setting", "param", "correct", "total", "wilson_low", "wilson_high")


def summarize_selections(method: str, setting: str, param, selected: Sequence[int], k_true: int,
                         confidence: float = 0.95) -> SelectionRow:
    """Count exact hits of ``k_true`` among selected k values."""
    correct = sum(1 for k in selected if k == k_true)
    total = len(selected)
    if total == 0:
        return SelectionRow(method, setting, param, 0, 0, float("nan"), float("nan"))
    low, high = wilson_interval(correct, total, confidence)
    return SelectionRow(method, setting, param, correct, total, low, high)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return "" if v is None else str(v)


def summary_csv(rows: Iterable[SelectionRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


@dataclass(frozen=True)
class Confusion:
    counts: np.ndarray
    row_levels: tuple
    col_levels: tuple

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(labels_a: Sequence, labels_b: Sequence) -> Confusion:
    """Co-occurrence counts; rows follow the sorted levels of ``labels_a``."""
    a = list(labels_a)
    b = list(labels_b)
    if len(a) != len(b):
        raise InvalidArgumentError("label sequences differ in length")
    ra = sorted(set(a))
    cb = sorted(set(b))
    ia = {v: i for i, v in enumerate(ra)}
    ib = {v: j for j, v in enumerate(cb)}
    counts = np.zeros((len(ra), len(cb)), dtype=int)
    for x, y in zip(a, b):
        counts[ia[x], ib[y]] += 1
    return Confusion(counts, tuple(ra), tuple(cb))


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def enrichment_pvalue(in_cluster_category: int, cluster_size: int, category_size: int,
                      population: int) -> float:
    """Upper-tail hypergeometric probability P(X >= observed).

    X counts category members in a random subset of ``cluster_size`` drawn
    from ``population`` items of which ``category_size`` are in the category.
    """
    x, n, K, N = in_cluster_category, cluster_size, category_size, population
    if min(x, n, K, N) < 0 or n > N or K > N or x > min(n, K):
        raise InvalidArgumentError("inconsistent hypergeometric counts")
    lo = max(x, n + K - N)
    hi = min(n, K)
    if x <= max(0, n + K - N):
        return 1.0
    j = np.arange(lo, hi + 1)
    logp = _log_comb(K, j) + _log_comb(N - K, n - j) - _log_comb(N, n)
    top = logp.max()
    p = math.exp(top) * math.fsum(np.exp(logp - top))
    return min(1.0, p)


def bonferroni_threshold(alpha: float, n_tests: int) -> float:
    if n_tests < 1:
        raise InvalidArgumentError("n_tests must be >= 1")
    return alpha / n_tests
