"""Closed-form large-sample predictions for a single Gabriel fold.

Truncated standard-normal moments, and the conditions under which one
cross-validation fold prefers the smaller or the larger number of clusters.
Exact equality on any boundary counts as preferring the smaller k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidArgumentError, InvalidIntervalError

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def norm_pdf(z: float) -> float:
    if math.isinf(z):
        return 0.0
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def norm_cdf(z: float) -> float:
    return float(ndtr(z))


def _mass(a: float, b: float) -> float:
    # upper tails for intervals right of zero avoid cancellation
    if a > 0:
        mass = norm_cdf(-a) - norm_cdf(-b)
    else:
        mass = norm_cdf(b) - norm_cdf(a)
    if not mass > 0:
        raise InvalidIntervalError(f"interval ({a}, {b}) carries no normal mass numerically")
    return mass


def _check(a: float, b: float):
    if math.isnan(a) or math.isnan(b) or not a < b:
        raise InvalidIntervalError(f"need a < b, got ({a}, {b})")


def _z_pdf(z: float, shift: float) -> float:
    """(z - shift) * phi(z), with the limit 0 at +-inf."""
    if math.isinf(z):
        return 0.0
    return (z - shift) * norm_pdf(z)


def truncated_normal_mean(a: float, b: float) -> float:
    """E(Z | a < Z < b) for standard normal Z; infinite endpoints allowed."""
    _check(a, b)
    return -(norm_pdf(b) - norm_pdf(a)) / _mass(a, b)


def truncated_normal_sqdev(delta: float, a: float, b: float) -> float:
    """E((Z - delta)^2 | a < Z < b) for standard normal Z."""
    _check(a, b)
    num = _z_pdf(b, 2.0 * delta) - _z_pdf(a, 2.0 * delta)
    return delta * delta + 1.0 - num / _mass(a, b)


def single_cluster_2d_prefers_one(rho: float) -> bool:
    """Whether CV(1) < CV(k) for every k > 1 on a correlated bivariate normal."""
    if not abs(rho) <= 1:
        raise InvalidArgumentError("correlation must lie in [-1, 1]")
    return abs(rho) < 0.5


def two_cluster_margin(mu_x: float, mu_y: float) -> float:
    """RHS - LHS of the two-cluster separation inequality (positive: k=2 wins)."""
    lhs = 2.0 * norm_pdf(mu_y) + mu_y + 2.0 * mu_y * norm_cdf(mu_y)
    rhs = 4.0 * mu_y * norm_cdf(mu_x)
    return rhs - lhs


def two_cluster_prefers_two(mu_x: float, mu_y: float) -> bool:
    """Whether a symmetric two-component mixture with means +-(mu_x, mu_y) gives CV(2) < CV(1)."""
    if mu_x < 0 or mu_y < 0:
        raise InvalidArgumentError("mu_x and mu_y must be non-negative")
    return two_cluster_margin(mu_x, mu_y) > 0


def two_cluster_boundary(mu_y: float) -> float:
    """The mu_x at which the two-cluster inequality is tight, for fixed mu_y > 0.

    Returns ``inf`` when no finite mu_x satisfies the inequality.
    """
    if not mu_y > 0:
        return math.inf
    target = (2.0 * norm_pdf(mu_y) + mu_y + 2.0 * mu_y * norm_cdf(mu_y)) / (4.0 * mu_y)
    if target >= 1.0:
        return math.inf
    if target <= 0.5:
        return 0.0
    from scipy.special import ndtri

    return float(ndtri(target))


@dataclass(frozen=True)
class BlockCovariance:
    """Covariance of (X, Y) split into predictor and response blocks."""

    sxx: np.ndarray
    sxy: np.ndarray
    syy: np.ndarray

    def __post_init__(self):
        sxx = np.atleast_2d(np.asarray(self.sxx, dtype=float))
        syy = np.atleast_2d(np.asarray(self.syy, dtype=float))
        sxy = np.asarray(self.sxy, dtype=float).reshape(sxx.shape[0], syy.shape[0])
        object.__setattr__(self, "sxx", sxx)
        object.__setattr__(self, "syy", syy)
        object.__setattr__(self, "sxy", sxy)

    @property
    def syx(self) -> np.ndarray:
        return self.sxy.T

    def assembled(self) -> np.ndarray:
        return np.block([[self.sxx, self.sxy], [self.syx, self.syy]])

    def is_psd(self, tol: float = 1e-10) -> bool:
        full = self.assembled()
        if not np.allclose(full, full.T, rtol=0.0, atol=tol):
            return False
        return bool(np.linalg.eigvalsh((full + full.T) / 2).min() >= -tol)


def single_cluster_general_prefers_one(cov: BlockCovariance) -> bool:
    """Whether CV(1) < CV(2) for a single Gaussian cluster in general dimension.

    Compares sqrt(lam1)/2 with u1' Syx Sxy u1 / sqrt(u1' Syx Sxx Sxy u1),
    where (lam1, u1) is the leading eigenpair of Syy.
    """
    if not cov.is_psd():
        raise InvalidArgumentError("assembled covariance is not symmetric PSD")
    w, v = np.linalg.eigh(cov.syy)
    lam1 = w[-1]
    if not lam1 > 0:
        raise InvalidArgumentError("response block needs a positive leading eigenvalue")
    u1 = v[:, -1]
    g = cov.sxy @ u1
    num = float(g @ g)
    den = float(g @ cov.sxx @ g)
    rhs = num / math.sqrt(den) if den > 0 else 0.0
    return math.sqrt(lam1) / 2.0 > rhs
