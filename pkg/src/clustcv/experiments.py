"""Repeatable experiments: theory checks, simulation sweeps and benchmarks."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .datasets import BENCHMARKS, load_benchmark
from .evaluation import SelectionRow, summarize_selections
from .gabriel import FoldView, fold_cv_error, gabriel_select_k_corrected
from .kmeans import KMeansParams
from .simgen import SimSpec, generate_setting
from .theory import single_cluster_2d_prefers_one, two_cluster_boundary, two_cluster_prefers_two
from .wold import wold_select_k

METHODS = ("gabriel", "corrected", "wold")


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0] >> 1)


def modal_k(ks: Sequence[int]) -> int:
    """Most frequent value; ties go to the smallest k."""
    counts = Counter(ks)
    top = max(counts.values())
    return min(k for k, c in counts.items() if c == top)


def single_fold_select(x: np.ndarray, y: np.ndarray, k_grid: Sequence[int], rng=None,
                       params: Optional[KMeansParams] = None) -> int:
    """Pick k on one fold: x predicts y, rows split at random into two halves."""
    rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    y = np.asarray(y, dtype=float).reshape(len(y), -1)
    n = x.shape[0]
    test = np.zeros(n, dtype=bool)
    test[rng.permutation(n)[: n // 2]] = True
    view = FoldView(x[~test], y[~test], x[test], y[test])
    best_k, best = None, math.inf
    for k in k_grid:
        e = fold_cv_error(view, k, params, rng)
        if e < best:
            best_k, best = k, e
    return best_k


def single_cluster_trial(rho: float, n: int = 20000, seed: int = 0, k_max: int = 5) -> int:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    x = z[:, 0]
    y = rho * z[:, 0] + math.sqrt(1 - rho * rho) * z[:, 1]
    return single_fold_select(x, y, range(1, k_max + 1), rng)


def two_cluster_trial(mu_x: float, mu_y: float, n: int = 20000, seed: int = 0) -> int:
    rng = np.random.default_rng(seed)
    sign = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    x = sign * mu_x + rng.standard_normal(n)
    y = sign * mu_y + rng.standard_normal(n)
    return single_fold_select(x, y, (1, 2), rng)


def two_cluster_boundary_many(mu_y: np.ndarray) -> np.ndarray:
    """Vectorized ``two_cluster_boundary`` for positive mu_y."""
    my = np.asarray(mu_y, dtype=float)
    target = (2.0 * np.exp(-0.5 * my * my) / math.sqrt(2 * math.pi) + my + 2.0 * my * ndtr(my)) / (4.0 * my)
    out = np.where(target <= 0.5, 0.0, ndtri(np.clip(target, 0.5, 1.0)))
    return np.where(target >= 1.0, np.inf, out)


def two_cluster_boundary_distance(mu_x: float, mu_y: float, y_max: float = 20.0,
                                  samples: int = 200_001) -> float:
    """Euclidean distance from (mu_x, mu_y) to the two-cluster decision curve."""
    ys = np.linspace(1e-4, y_max, samples)
    xs = two_cluster_boundary_many(ys)
    ok = np.isfinite(xs)
    return float(np.sqrt(((xs[ok] - mu_x) ** 2 + (ys[ok] - mu_y) ** 2).min()))


@dataclass(frozen=True)
class Agreement:
    experiment: str
    point: str
    expected: str
    agree: int
    total: int
    threshold: float

    @property
    def rate(self) -> float:
        return self.agree / self.total

    @property
    def passed(self) -> bool:
        return self.rate >= self.threshold


def verify_single_cluster(rhos: Iterable[float], reps: int = 10, n: int = 20000, seed: int = 0,
                          threshold: float = 0.9) -> list:
    out = []
    for rho in rhos:
        want_one = single_cluster_2d_prefers_one(rho)
        hits = 0
        for r in range(reps):
            k = single_cluster_trial(rho, n, derive_seed(seed, 2, round(rho * 1000), r))
            hits += (k == 1) == want_one
        out.append(Agreement("single_cluster", f"rho={rho:g}", "k=1" if want_one else "k>=2",
                             hits, reps, threshold))
    return out


def verify_two_cluster(points: Iterable[tuple], reps: int = 10, n: int = 20000, seed: int = 0,
                       threshold: float = 0.8) -> list:
    out = []
    for mx, my in points:
        want_two = two_cluster_prefers_two(mx, my)
        hits = 0
        for r in range(reps):
            k = two_cluster_trial(mx, my, n, derive_seed(seed, 3, round(mx * 1000), round(my * 1000), r))
            hits += (k == 2) == want_two
        out.append(Agreement("two_cluster", f"mu_x={mx:g};mu_y={my:g}", "k=2" if want_two else "k=1",
                             hits, reps, threshold))
    return out


def grid_points(step: float = 0.5, lo: float = 0.0, hi: float = 3.0, margin: float = 0.5) -> list:
    """Grid points in [lo, hi]^2 at least ``margin`` from the two-cluster boundary."""
    vals = np.round(np.arange(lo, hi + step / 2, step), 10)
    return [(float(x), float(y)) for y in vals for x in vals
            if two_cluster_boundary_distance(x, y) >= margin]


def replicate_selections(spec: SimSpec, replicates: int, methods: Sequence[str] = METHODS,
                         k_grid: Sequence[int] = tuple(range(1, 11)), K: int = 5, L: int = 2,
                         params: Optional[KMeansParams] = None, threads: int = 1) -> dict:
    """Selected k per method for each replicate of ``spec``."""
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    picks = {m: [] for m in methods}
    for r in range(replicates):
        rep_seed = derive_seed(spec.seed, r)
        data, _ = generate_setting(spec.with_seed(rep_seed))
        if "gabriel" in methods or "corrected" in methods:
            res = gabriel_select_k_corrected(data, k_grid, K, L, params, derive_seed(rep_seed, 1),
                                             threads=threads)
            if "gabriel" in picks:
                picks["gabriel"].append(res.report0.selected_k)
            if "corrected" in picks:
                picks["corrected"].append(res.report.selected_k)
        if "wold" in methods:
            rep = wold_select_k(data, k_grid, params=params, rng=derive_seed(rep_seed, 2), threads=threads)
            picks["wold"].append(rep.selected_k)
    return picks


def simulate(spec: SimSpec, replicates: int, methods: Sequence[str] = METHODS, **kw) -> list:
    """Selection-frequency summary rows, one per method."""
    if replicates == 0:
        return []
    picks = replicate_selections(spec, replicates, methods, **kw)
    return [summarize_selections(m, spec.setting, spec.sweep_value, picks[m], spec.k_true)
            for m in methods]


def benchmark_selections(name: str, seeds: Sequence[int] = range(5), methods: Sequence[str] = METHODS,
                         k_grid: Sequence[int] = tuple(range(1, 11)), params: Optional[KMeansParams] = None,
                         threads: int = 1) -> dict:
    """Selected k per method and seed on a bundled benchmark."""
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark {name!r}")
    data = load_benchmark(name)
    picks = {m: [] for m in methods}
    for s in seeds:
        if "gabriel" in methods or "corrected" in methods:
            res = gabriel_select_k_corrected(data, k_grid, params=params, rng=s, threads=threads)
            if "gabriel" in picks:
                picks["gabriel"].append(res.report0.selected_k)
            if "corrected" in picks:
                picks["corrected"].append(res.report.selected_k)
        if "wold" in methods:
            picks["wold"].append(wold_select_k(data, k_grid, params=params, rng=s, threads=threads).selected_k)
    return picks
