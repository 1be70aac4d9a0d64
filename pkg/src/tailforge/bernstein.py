"""Bernstein-polynomial CDF approximation on [0, 1] and its density."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .empirical import empirical_cdf

__all__ = ["BernsteinCdf", "fit_bernstein", "identity_cdf"]

DENSITY_FLOOR = 1e-12


def _log_binom(m: int) -> np.ndarray:
    j = np.arange(m + 1)
    return gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)


def _kernel_matrix(u: np.ndarray, m: int, log_binom: np.ndarray) -> np.ndarray:
    """Beta kernels (m choose j) u^j (1-u)^(m-j) for interior u, log-space.

    Kernels negligible at double precision underflow harmlessly to 0.
    """
    j = np.arange(m + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        logw = (
            log_binom
            + j * np.log(u)[:, None]
            + (m - j) * np.log1p(-u)[:, None]
        )
        return np.exp(logw)


@dataclass(frozen=True)
class BernsteinCdf:
    """Degree-m Bernstein polynomial through coefficients c_j = G(j/m)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("need at least two coefficients (degree >= 1)")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> int:
        return self.coeffs.size - 1

    def _eval(self, u, degree: int, weights: np.ndarray, scale: float, endpoints):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u_arr < 0) or np.any(u_arr > 1):
            raise ValueError("u must lie in [0, 1]")
        out = np.empty_like(u_arr)
        lo, hi = u_arr == 0.0, u_arr == 1.0
        inner = ~(lo | hi)
        if inner.any():
            mat = _kernel_matrix(u_arr[inner], degree, _log_binom(degree))
            out[inner] = scale * (mat @ weights)
        out[lo], out[hi] = endpoints
        return float(out[0]) if np.isscalar(u) or np.ndim(u) == 0 else out

    def cdf(self, u):
        """CDF value: sum of c_j times the degree-m beta kernels."""
        c = self.coeffs
        return self._eval(u, self.m, c, 1.0, (c[0], c[-1]))

    def pdf(self, u):
        """Exact derivative of the CDF, nonnegative for monotone coefficients."""
        c, m = self.coeffs, self.m
        d = np.diff(c)
        return self._eval(u, m - 1, d, m, (m * d[0], m * d[-1]))

    def pdf_deriv(self, u):
        """Second derivative of the CDF (slope of the density)."""
        c, m = self.coeffs, self.m
        if m < 2:
            z = np.zeros_like(np.atleast_1d(np.asarray(u, dtype=float)))
            return 0.0 if np.ndim(u) == 0 else z
        d2 = np.diff(c, 2)
        s = m * (m - 1)
        return self._eval(u, m - 2, d2, s, (s * d2[0], s * d2[-1]))


def fit_bernstein(values, m: int) -> BernsteinCdf:
    """Plug the empirical CDF of values in [0, 1] into the degree-m polynomial."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("need at least one value")
    if np.any(v < 0) or np.any(v > 1):
        raise ValueError("values must lie in [0, 1]")
    if m < 1:
        raise ValueError("degree must be >= 1")
    grid = np.arange(m + 1) / m
    return BernsteinCdf(empirical_cdf(v)(grid))


def identity_cdf(m: int = 1) -> BernsteinCdf:
    """The identity CDF on [0, 1] (uniform), any degree."""
    return BernsteinCdf(np.arange(m + 1) / m)
