import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate


def brute_force_dispersion(points, k):
    """Smallest within-cluster SS over every assignment using exactly k clusters."""
    x = np.asarray(points, dtype=float)
    n = x.shape[0]
    labels = np.array(list(itertools.product(range(k), repeat=n)), dtype=int).reshape(-1, n)
    # fix the first point's label to skip relabelings
    labels = labels[labels[:, 0] == 0]
    onehot = labels[:, :, None] == np.arange(k)[None, None, :]  # (M, n, k)
    counts = onehot.sum(axis=1)
    keep = (counts > 0).all(axis=1)
    labels, onehot, counts = labels[keep], onehot[keep], counts[keep]
    # W = sum_g sum_i ||x_i - mean_g||^2, computed directly per cluster
    sums = np.einsum("mnk,nd->mkd", onehot, x)
    means = sums / counts[:, :, None]
    resid = x[None, :, :] - np.take_along_axis(means, labels[:, :, None], axis=1)
    w = (resid ** 2).sum(axis=(1, 2))
    return float(w.min())


def quad_truncated_moment(f, a, b):
    """E(f(Z) | a < Z < b) for standard normal Z by adaptive quadrature."""
    pdf = lambda z: math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    num = integrate.quad(lambda z: f(z) * pdf(z), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    den = integrate.quad(pdf, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return num / den


def exact_hypergeom_tail(x, n, K, N):
    """P(X >= x) as an exact rational."""
    total = Fraction(0)
    for j in range(x, min(n, K) + 1):
        total += Fraction(math.comb(K, j) * math.comb(N - K, n - j), math.comb(N, n))
    return total


def noiseless_clusters(centers, sizes):
    centers = np.asarray(centers, dtype=float)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return centers[labels], labels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
