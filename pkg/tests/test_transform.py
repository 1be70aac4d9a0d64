import numpy as np
import pytest

from tailforge import (DistributionSpec, GpdParams, Sample, exceedances, fit_bernstein,
                       fit_gpd_ml, fit_transform, gpd_loglik, identity_cdf, sample,
                       transform_loglik, transform_loglik_grad)


@pytest.fixture(scope="module")
def gpd_exc():
    s = Sample(sample(DistributionSpec.gpd(0.5, 1.0), 2001, seed=5))
    return exceedances(s, 2000, "difference")


def test_degree_one_reduces_to_ml(gpd_exc):
    ml = fit_gpd_ml(gpd_exc)
    tf = fit_transform(gpd_exc, 1)
    assert tf.xi == pytest.approx(ml.xi, abs=1e-8)
    assert tf.sigma == pytest.approx(ml.sigma, rel=1e-8)
    # degree-1 smoothing of values in (0, 1] is the identity CDF
    u = np.linspace(0, 1, 21)
    assert np.max(np.abs(tf.smooth_cdf.cdf(u) - u)) < 1e-12


def test_well_specified_recovery(gpd_exc):
    tf = fit_transform(gpd_exc, 20)
    assert tf.xi == pytest.approx(0.5, abs=0.1)
    u = np.linspace(0, 1, 400)
    assert np.max(np.abs(tf.smooth_cdf.cdf(u) - u)) < 0.05


def test_infinite_tolerance_returns_start(gpd_exc):
    ml = fit_gpd_ml(gpd_exc)
    tf = fit_transform(gpd_exc, 20, tol=np.inf)
    assert tf.iterations == 0
    assert tf.xi == ml.xi
    assert tf.sigma == ml.sigma


def test_loglik_identity_cdf_equals_gpd(gpd_exc):
    g = identity_cdf()
    for xi, sigma in [(0.4, 1.1), (0.6, 0.8), (-0.1, 2.0)]:
        assert transform_loglik(gpd_exc, xi, sigma, g) == pytest.approx(
            gpd_loglik(GpdParams(xi, sigma), gpd_exc), abs=1e-12)


def test_loglik_off_support_sentinel(gpd_exc):
    assert transform_loglik(gpd_exc, -0.4, 0.1, identity_cdf()) == -np.inf


def test_loglik_gradient_matches_fd(gpd_exc):
    z = np.clip(np.exp(-np.log1p(0.5 * gpd_exc.values) / 0.5), 0, 1)
    g = fit_bernstein(z, 15)
    rng = np.random.default_rng(9)
    h = 1e-6
    checked = 0
    for _ in range(40):
        xi = rng.uniform(0.2, 1.2)
        sigma = rng.uniform(0.6, 2.0)
        grad = transform_loglik_grad(gpd_exc, xi, sigma, g)
        f = lambda a, b: transform_loglik(gpd_exc, a, np.exp(b), g)  # noqa: E731
        ls = np.log(sigma)
        fd = np.array([(f(xi + h, ls) - f(xi - h, ls)) / (2 * h),
                       (f(xi, ls + h) - f(xi, ls - h)) / (2 * h)])
        assert np.max(np.abs(grad - fd) / (1 + np.abs(fd))) < 1e-5
        checked += 1
        if checked >= 20:
            break


def test_mismatched_cdf_scores_lower_on_average():
    # replacing the fitted transform with a wrong CDF loses likelihood
    skew = fit_bernstein(np.linspace(0, 1, 60) ** 3, 12)
    ident = identity_cdf(12)
    diffs = []
    for seed in range(100):
        s = Sample(sample(DistributionSpec.gpd(0.5, 1.0), 120, seed=seed))
        exc = exceedances(s, 100, "difference")
        ml = fit_gpd_ml(exc)
        good = transform_loglik(exc, ml.xi, ml.sigma, ident)
        bad = transform_loglik(exc, ml.xi, ml.sigma, skew)
        diffs.append(good - bad)
    assert np.mean(diffs) > 0


def test_accepted_likelihood_trace_monotone(gpd_exc):
    tf = fit_transform(gpd_exc, 25)
    trace = tf.loglik_trace or []
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_fixed_point_stays_near_identity():
    # correctly specified data: the final smoothing stays within DKW distance
    s = Sample(sample(DistributionSpec.exponential(1.0), 1501, seed=8))
    exc = exceedances(s, 1500, "difference")
    tf = fit_transform(exc, 15)
    u = np.linspace(0, 1, 300)
    dkw = np.sqrt(np.log(2 / 0.001) / (2 * 1500)) + 2.0 / 15
    assert np.max(np.abs(tf.smooth_cdf.cdf(u) - u)) < dkw


def test_track_consistency_on_pareto_data():
    s = Sample(sample(DistributionSpec.pareto(1.0), 2501, seed=11))
    gaps = []
    for k in (200, 2000):
        m = max(1, round(k**0.5))
        ratio = fit_transform(exceedances(s, k, "ratio"), m)
        diff = fit_transform(exceedances(s, k, "difference"), m)
        gaps.append(abs(ratio.xi - diff.xi))
    assert gaps[1] < gaps[0]


def test_preconditions():
    s = Sample(np.arange(1.0, 7.0))
    with pytest.raises(ValueError):
        fit_transform(exceedances(s, 4, "difference"), 3)
    with pytest.raises(ValueError):
        fit_transform(exceedances(s, 5, "difference"), 0)
