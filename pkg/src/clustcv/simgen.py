"""Simulated cluster data: separated centers, tau calibration, five settings."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import InfeasibleConfigurationError, InvalidArgumentError
from .matrix import DataMatrix

SETTINGS = ("correlated", "noise_dims", "high_dim", "var_hetero", "heavy_tail", "custom")

# setting -> (name of the swept parameter, its paper grid)
SWEEPS = {
    "correlated": ("rho", tuple(round(0.1 * i, 1) for i in range(10))),
    "noise_dims": ("r", tuple(range(0, 55, 6))),
    "high_dim": ("P", tuple(range(10, 101, 10))),
    "var_hetero": ("R", (1,) + tuple(range(5, 46, 5))),
    "heavy_tail": ("nu", tuple(range(11, 1, -1))),
}

SIGNAL_DIMS_NOISE_SETTING = 6


def _alternating(k: int, big: int, small: int) -> tuple:
    return tuple(big if g % 2 == 0 else small for g in range(k))


@dataclass(frozen=True)
class SimSpec:
    """One simulation setting: cluster count, dimension, sizes and parameters.

    ``params`` holds the setting's knobs: ``rho`` (correlated), ``r``
    (noise_dims), ``R`` (var_hetero), ``nu`` (heavy_tail), optionally
    ``tau`` (center scale) and ``sigma`` (custom noise sd).
    """

    setting: str
    k_true: int
    dims: int
    cluster_sizes: tuple
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "cluster_sizes", tuple(int(s) for s in self.cluster_sizes))
        object.__setattr__(self, "params", dict(self.params))
        if self.setting not in SETTINGS:
            raise InvalidArgumentError(f"unknown setting {self.setting!r}")
        if self.k_true < 1 or len(self.cluster_sizes) != self.k_true:
            raise InvalidArgumentError("need one cluster size per true cluster")
        if min(self.cluster_sizes) < 1:
            raise InvalidArgumentError("cluster sizes must be >= 1")
        if self.dims < 1:
            raise InvalidArgumentError("dims must be >= 1")
        p = self.params
        if "tau" in p and not p["tau"] > 0:
            raise InvalidArgumentError("tau must be positive")
        if self.setting == "correlated":
            rho = p.get("rho", 0.0)
            if not abs(rho) < 1 or rho <= -1.0 / max(1, self.dims - 1):
                raise InvalidArgumentError("rho must give a positive definite compound-symmetric matrix")
        elif self.setting == "noise_dims":
            r = p.get("r", 0)
            if r < 0 or int(r) != r or self.dims != SIGNAL_DIMS_NOISE_SETTING + r:
                raise InvalidArgumentError("noise_dims needs integer r >= 0 and dims = 6 + r")
        elif self.setting == "var_hetero":
            if not p.get("R", 1.0) >= 1:
                raise InvalidArgumentError("R must be >= 1")
        elif self.setting == "heavy_tail":
            if not p.get("nu", 11) >= 2:
                raise InvalidArgumentError("nu must be >= 2")
        elif self.setting == "custom":
            if not p.get("sigma", 1.0) > 0:
                raise InvalidArgumentError("sigma must be positive")

    @property
    def n(self) -> int:
        return sum(self.cluster_sizes)

    @property
    def signal_dims(self) -> int:
        if self.setting == "noise_dims":
            return SIGNAL_DIMS_NOISE_SETTING
        return self.dims

    @property
    def sweep_value(self):
        name = SWEEPS.get(self.setting, (None,))[0]
        if name == "P":
            return self.dims
        return self.params.get(name) if name else None

    def with_seed(self, seed: int) -> "SimSpec":
        return SimSpec(self.setting, self.k_true, self.dims, self.cluster_sizes, self.params, seed)

    def to_json(self) -> str:
        d = asdict(self)
        d["cluster_sizes"] = list(self.cluster_sizes)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        if "cluster_sizes" not in d:
            value = d.get("value", d.get("params", {}).get(SWEEPS.get(d["setting"], ("",))[0]))
            return make_spec(d["setting"], value, d.get("seed", 0), tau=d.get("params", {}).get("tau"))
        return cls(
            d["setting"], int(d["k_true"]), int(d["dims"]), tuple(d["cluster_sizes"]),
            dict(d.get("params", {})), int(d.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "SimSpec":
        return cls.from_dict(json.loads(text))


def make_spec(setting: str, value=None, seed: int = 0, tau: Optional[float] = None) -> SimSpec:
    """Spec for one of the five standard settings at a given swept value."""
    extra = {} if tau is None else {"tau": float(tau)}
    if setting == "correlated":
        rho = 0.0 if value is None else float(value)
        return SimSpec(setting, 6, 10, _alternating(6, 100, 50), {"rho": rho, **extra}, seed)
    if setting == "noise_dims":
        r = 0 if value is None else int(value)
        return SimSpec(setting, 3, SIGNAL_DIMS_NOISE_SETTING + r, _alternating(3, 1000, 500), {"r": r, **extra}, seed)
    if setting == "high_dim":
        p = 10 if value is None else int(value)
        return SimSpec(setting, 8, p, _alternating(8, 100, 50), extra, seed)
    if setting == "var_hetero":
        big_r = 1.0 if value is None else float(value)
        return SimSpec(setting, 3, 20, (60, 60, 60), {"R": big_r, **extra}, seed)
    if setting == "heavy_tail":
        nu = 11.0 if value is None else float(value)
        return SimSpec(setting, 5, 15, (80,) * 5, {"nu": nu, **extra}, seed)
    raise InvalidArgumentError(f"no standard spec for setting {setting!r}")


def _min_pairwise_distances(z: np.ndarray) -> np.ndarray:
    """Smallest pairwise distance within each center set; z is (draws, k, dims)."""
    k = z.shape[1]
    if k < 2:
        return np.full(z.shape[0], np.inf)
    iu, ju = np.triu_indices(k, 1)
    diff = z[:, iu, :] - z[:, ju, :]
    return np.sqrt(np.einsum("dpj,dpj->dp", diff, diff).min(axis=1))


def sample_separated_centers(
    k: int, dims: int, tau: float, min_sep: float = 1.0, rng=None, max_draws: int = 10_000
) -> np.ndarray:
    """Draw k centers from N(0, tau I), redrawing the whole set until all pairs are >= min_sep apart."""
    if k < 1 or dims < 1:
        raise InvalidArgumentError("k and dims must be >= 1")
    if not tau > 0 or min_sep < 0:
        raise InvalidArgumentError("need tau > 0 and min_sep >= 0")
    rng = np.random.default_rng(rng)
    scale = math.sqrt(tau)
    for _ in range(max_draws):
        centers = scale * rng.standard_normal((k, dims))
        if _min_pairwise_distances(centers[None])[0] >= min_sep:
            return centers
    raise InfeasibleConfigurationError(f"no separated center set in {max_draws} draws")


def calibrate_tau(
    k: int,
    dims: int,
    min_sep: float = 1.0,
    target_accept: float = 0.5,
    rng=None,
    draws: int = 2000,
    tol: float = 0.03,
    bracket: tuple = (1e-3, 1e3),
) -> float:
    """Center scale tau whose first-draw acceptance probability is near ``target_accept``.

    The acceptance estimate uses one fixed batch of standard-normal center
    sets for every probe, so it is monotone in tau and the bisection
    (on log tau) is well defined.
    """
    if not 0 < target_accept < 1:
        raise InvalidArgumentError("target_accept must lie in (0, 1)")
    lo, hi = bracket
    if k < 2 or min_sep == 0:
        return lo
    rng = np.random.default_rng(rng)
    dmin = _min_pairwise_distances(rng.standard_normal((draws, k, dims)))

    def accept(tau):
        return float(np.mean(math.sqrt(tau) * dmin >= min_sep))

    if accept(lo) > target_accept + tol or accept(hi) < target_accept - tol:
        raise InfeasibleConfigurationError("target acceptance not bracketed")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        a = accept(mid)
        if abs(a - target_accept) <= tol:
            return mid
        if a < target_accept:
            lo = mid
        else:
            hi = mid
    raise InfeasibleConfigurationError("tau calibration did not converge")


@lru_cache(maxsize=None)
def default_tau(k: int, dims: int, min_sep: float = 1.0) -> float:
    """Calibrated tau for 50% first-draw acceptance, cached per (k, dims)."""
    return calibrate_tau(k, dims, min_sep, 0.5, np.random.default_rng([k, dims, 20240101]))


def generate_setting(spec: SimSpec) -> tuple:
    """Data matrix and 0-based true labels for ``spec``, rows grouped by cluster."""
    rng = np.random.default_rng(spec.seed)
    k = spec.k_true
    signal = spec.signal_dims
    tau = spec.params.get("tau") or default_tau(k, signal)
    centers = sample_separated_centers(k, signal, tau, 1.0, rng)
    labels = np.repeat(np.arange(k), spec.cluster_sizes)
    n = labels.size
    p = spec.params

    if spec.setting == "correlated":
        rho = p.get("rho", 0.0)
        cov = np.full((signal, signal), rho) + (1.0 - rho) * np.eye(signal)
        noise = rng.standard_normal((n, signal)) @ np.linalg.cholesky(cov).T
        x = centers[labels] + noise
    elif spec.setting in ("noise_dims", "high_dim"):
        x = centers[labels] + rng.standard_normal((n, signal))
        if spec.setting == "noise_dims":
            x = np.hstack([x, rng.uniform(0.0, 1.0, (n, int(p.get("r", 0))))])
    elif spec.setting == "var_hetero":
        big_r = p.get("R", 1.0)
        variances = np.array([1.0, (1.0 + big_r) / 2.0, big_r])[:k]
        x = centers[labels] + rng.standard_normal((n, signal)) * np.sqrt(variances[labels])[:, None]
    elif spec.setting == "heavy_tail":
        x = centers[labels] + rng.standard_t(p.get("nu", 11.0), (n, signal))
    else:
        x = centers[labels] + p.get("sigma", 1.0) * rng.standard_normal((n, signal))
    return DataMatrix(x), labels
