import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailforge import BernsteinCdf, fit_bernstein, identity_cdf


def test_linear_reproduction():
    for m in (1, 5, 50, 500):
        b = identity_cdf(m)
        u = np.linspace(0, 1, 101)
        assert np.max(np.abs(b.cdf(u) - u)) < 1e-12
        assert b.cdf(0.3) == pytest.approx(0.3, abs=1e-12)


def test_endpoint_interpolation():
    b = BernsteinCdf(np.array([0.1, 0.4, 0.9]))
    assert b.cdf(0.0) == 0.1
    assert b.cdf(1.0) == 0.9


def test_quadratic_example():
    b = BernsteinCdf(np.array([0.0, 1.0, 1.0]))  # 2u - u^2
    assert b.cdf(0.5) == pytest.approx(0.75, abs=1e-14)
    assert b.pdf(0.5) == pytest.approx(1.0, abs=1e-14)


def test_pdf_of_identity():
    b = identity_cdf(7)
    u = np.linspace(0, 1, 50)
    assert np.max(np.abs(b.pdf(u) - 1.0)) < 1e-11


def test_pdf_matches_finite_differences():
    rng = np.random.default_rng(0)
    b = fit_bernstein(rng.random(200), 25)
    u = rng.uniform(0.01, 0.99, size=100)
    h = 1e-5
    fd = (b.cdf(u + h) - b.cdf(u - h)) / (2 * h)
    assert np.max(np.abs(b.pdf(u) - fd)) < 1e-6


def test_pdf_deriv_matches_finite_differences():
    rng = np.random.default_rng(3)
    b = fit_bernstein(rng.random(150), 18)
    u = rng.uniform(0.02, 0.98, size=60)
    h = 1e-5
    fd = (b.pdf(u + h) - b.pdf(u - h)) / (2 * h)
    assert np.max(np.abs(b.pdf_deriv(u) - fd)) < 1e-5


def test_fit_single_value():
    b = fit_bernstein([0.5], 2)
    assert np.array_equal(b.coeffs, [0.0, 1.0, 1.0])
    b1 = fit_bernstein([0.5], 1)
    assert np.array_equal(b1.coeffs, [0.0, 1.0])
    u = np.linspace(0, 1, 11)
    assert np.max(np.abs(b1.cdf(u) - u)) < 1e-14


def test_fit_uniform_dkw():
    rng = np.random.default_rng(42)
    b = fit_bernstein(rng.random(10_000), 100)
    u = np.linspace(0, 1, 2001)
    assert np.max(np.abs(b.cdf(u) - u)) < 0.03


def test_fit_validation():
    with pytest.raises(ValueError):
        fit_bernstein([], 3)
    with pytest.raises(ValueError):
        fit_bernstein([1.5], 3)
    with pytest.raises(ValueError):
        fit_bernstein([0.5], 0)


def test_monotone_coeffs_give_nonnegative_pdf():
    rng = np.random.default_rng(7)
    b = fit_bernstein(rng.random(50), 40)
    u = np.linspace(0, 1, 1000)
    assert np.min(b.pdf(u)) >= 0.0


def test_pdf_integrates_to_endpoint_gap():
    rng = np.random.default_rng(11)
    b = fit_bernstein(rng.beta(2, 5, size=400), 30)
    # composite Simpson with 10^4 panels
    u = np.linspace(0, 1, 20_001)
    vals = b.pdf(u)
    integral = float(np.trapezoid(vals, u)) if False else _simpson(vals, u)
    assert integral == pytest.approx(b.coeffs[-1] - b.coeffs[0], abs=1e-8)


def _simpson(vals, u):
    h = u[1] - u[0]
    return h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())


def test_large_degree_stability():
    # no overflow or NaN at degree 10^4
    m = 10_000
    b = identity_cdf(m)
    u = np.linspace(0.001, 0.999, 37)
    vals = b.cdf(u)
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(vals - u)) < 1e-9


def test_domain_validation():
    b = identity_cdf(3)
    with pytest.raises(ValueError):
        b.cdf(-0.1)
    with pytest.raises(ValueError):
        b.pdf(1.1)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=60),
       st.integers(1, 40))
def test_fitted_cdf_is_monotone(values, m):
    b = fit_bernstein(values, m)
    assert np.all(np.diff(b.coeffs) >= 0)
    u = np.linspace(0, 1, 201)
    assert np.all(np.diff(b.cdf(u)) >= -1e-12)
