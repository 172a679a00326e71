import json
import math

import numpy as np
import pytest
from scipy import stats

from clustcv.errors import InfeasibleConfigurationError, InvalidArgumentError
from clustcv.simgen import (
    SWEEPS,
    SimSpec,
    calibrate_tau,
    default_tau,
    generate_setting,
    make_spec,
    sample_separated_centers,
)


def test_centers_trivial_cases():
    c = sample_separated_centers(1, 3, 1.0, rng=0)
    assert c.shape == (1, 3)
    a = sample_separated_centers(4, 2, 1.0, min_sep=0.0, rng=np.random.default_rng(9))
    b = np.sqrt(1.0) * np.random.default_rng(9).standard_normal((4, 2))
    np.testing.assert_array_equal(a, b)


def test_centers_separated():
    c = sample_separated_centers(6, 10, 0.5, 1.0, rng=1)
    d = np.sqrt(((c[:, None] - c[None]) ** 2).sum(-1))
    assert d[np.triu_indices(6, 1)].min() >= 1.0


def test_centers_infeasible():
    with pytest.raises(InfeasibleConfigurationError):
        sample_separated_centers(10, 1, 1e-6, 1.0, rng=0, max_draws=20)


def test_calibrated_acceptance_rate():
    # Monte Carlo on fresh draws, independent of the calibration batch
    tau = default_tau(6, 10)
    rng = np.random.default_rng(77)
    hits = 0
    for _ in range(1000):
        c = math.sqrt(tau) * rng.standard_normal((6, 10))
        d = np.sqrt(((c[:, None] - c[None]) ** 2).sum(-1))
        hits += d[np.triu_indices(6, 1)].min() >= 1.0
    assert abs(hits / 1000 - 0.5) <= 0.05


def test_calibration_closed_form_two_centers_1d():
    # |c1 - c2| ~ N(0, 2 tau): P(|D| >= 1) = 1/2 at tau = 1 / (2 * z_{0.75}^2)
    want = 1.0 / (2 * stats.norm.ppf(0.75) ** 2)
    got = calibrate_tau(2, 1, rng=0, draws=20000, tol=0.005)
    assert got == pytest.approx(want, rel=0.05)


def test_calibrate_errors():
    with pytest.raises(InvalidArgumentError):
        calibrate_tau(3, 2, target_accept=1.0)
    assert calibrate_tau(1, 5) == 1e-3


def test_spec_validation():
    with pytest.raises(InvalidArgumentError):
        SimSpec("correlated", 2, 3, (10,), {}, 0)
    with pytest.raises(InvalidArgumentError):
        SimSpec("bogus", 1, 3, (10,), {}, 0)


def test_spec_json_round_trip():
    s = make_spec("noise_dims", 12, seed=3)
    assert SimSpec.from_json(s.to_json()) == s
    short = SimSpec.from_dict({"setting": "high_dim", "value": 30, "seed": 2})
    assert short == make_spec("high_dim", 30, 2)
    assert json.loads(s.to_json())["k_true"] == 3


@pytest.mark.parametrize("setting", sorted(SWEEPS))
def test_standard_shapes(setting):
    value = SWEEPS[setting][1][1]
    spec = make_spec(setting, value, seed=1)
    data, labels = generate_setting(spec)
    assert data.shape == (spec.n, spec.dims)
    assert np.bincount(labels).tolist() == list(spec.cluster_sizes)
    again, _ = generate_setting(spec)
    np.testing.assert_array_equal(data.values, again.values)


def test_correlated_sizes_and_noise():
    spec = make_spec("correlated", 0.6, seed=0)
    assert spec.cluster_sizes == (100, 50, 100, 50, 100, 50)
    data, labels = generate_setting(spec)
    x = data.values
    means = np.array([x[labels == g].mean(0) for g in range(6)])
    resid = x - means[labels]
    c = np.corrcoef(resid, rowvar=False)
    off = c[np.triu_indices(10, 1)]
    assert abs(off.mean() - 0.6) < 0.05


def test_noise_dims_uniform_block():
    spec = make_spec("noise_dims", 6, seed=0)
    data, _ = generate_setting(spec)
    noise = data.values[:, 6:]
    assert noise.min() >= 0 and noise.max() <= 1
    assert abs(noise.mean() - 0.5) < 0.02


def test_var_hetero_variances():
    spec = make_spec("var_hetero", 25, seed=0)
    data, labels = generate_setting(spec)
    x = data.values
    v = [x[labels == g].var(axis=0, ddof=1).mean() for g in range(3)]
    np.testing.assert_allclose(v, [1.0, 13.0, 25.0], rtol=0.25)
