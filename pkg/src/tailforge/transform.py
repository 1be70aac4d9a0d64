"""Iterative semiparametric transformed-POT fit.

Alternates two steps from the classical ML start: map the exceedances
through the current fitted survival function to pseudo-uniform values,
smooth their empirical CDF with a Bernstein polynomial, then re-maximize
the composite likelihood over the POT parameters.  Stops when the gain in
log likelihood falls below the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bernstein import DENSITY_FLOOR, BernsteinCdf, fit_bernstein
from .empirical import ExceedanceSet
from .gpd import XI_BOX, XI_EPS, _nll_xi_logsig, fit_gpd_ml
from .optim import nelder_mead

__all__ = ["TransformFit", "fit_transform", "transform_loglik", "transform_loglik_grad"]

PARETO_XI_BOX = (1e-4, 10.0)


@dataclass
class TransformFit:
    """Result of the iterative transformed fit."""

    track: str
    k: int
    n: int
    threshold: float
    xi: float
    sigma: float | None
    smooth_cdf: BernsteinCdf
    m: int
    iterations: int
    converged: bool
    loglik: float
    loglik_trace: list = None

    @property
    def tau(self) -> float:
        if self.sigma is None:
            raise ValueError("tau is defined on the GPD track only")
        return self.xi / self.sigma


def _log_sf(track: str, xi: float, sigma: float | None, y: np.ndarray):
    """log of the fitted POT survival at the exceedances, None off support."""
    if track == "pareto":
        return -np.log(y) / xi
    if abs(xi) < XI_EPS:
        return -y / sigma
    if xi < 0 and y.max() * -xi >= sigma:
        return None
    return -np.log1p(xi / sigma * y) / xi


def transform_loglik(exc: ExceedanceSet, xi: float, sigma: float | None,
                     smooth_cdf: BernsteinCdf) -> float:
    """Composite log likelihood: smoothed transform density plus POT density."""
    y = exc.values
    if exc.mode == "ratio":
        if not PARETO_XI_BOX[0] <= xi <= PARETO_XI_BOX[1]:
            return -np.inf
        base = -y.size * np.log(xi) - (1.0 + 1.0 / xi) * np.log(y).sum()
        lu = -np.log(y) / xi
    else:
        base = -_nll_xi_logsig(xi, np.log(sigma), y)
        if not np.isfinite(base):
            return -np.inf
        lu = _log_sf("gpd", xi, sigma, y)
    g = smooth_cdf.pdf(np.exp(lu))
    return base + np.log(np.maximum(g, DENSITY_FLOOR)).sum()


def transform_loglik_grad(exc: ExceedanceSet, xi: float, sigma: float,
                          smooth_cdf: BernsteinCdf) -> np.ndarray:
    """Analytic gradient of transform_loglik in (xi, log sigma), GPD track.

    Valid away from the density floor (the floor zeroes the smooth term).
    """
    y = exc.values
    k = y.size
    z = y / sigma
    if abs(xi) < XI_EPS:
        raise ValueError("gradient is provided for |xi| >= 1e-6")
    arg = 1.0 + xi * z
    if np.any(arg <= 0):
        raise ValueError("parameters violate the data support")
    l1p = np.log1p(xi * z)
    s2_terms = z / arg
    # GPD part
    d_xi = l1p.sum() / xi**2 - (1.0 + 1.0 / xi) * s2_terms.sum()
    d_ls = -k + (1.0 + xi) * s2_terms.sum()
    # smooth part: d/dtheta log g(u) = g'(u)/g(u) * u * d(log u)/dtheta
    lu = -l1p / xi
    u = np.exp(lu)
    g = smooth_cdf.pdf(u)
    ratio = np.where(g > DENSITY_FLOOR, smooth_cdf.pdf_deriv(u) / np.maximum(g, DENSITY_FLOOR), 0.0)
    dlu_dxi = l1p / xi**2 - s2_terms / xi
    dlu_dls = s2_terms
    d_xi += (ratio * u * dlu_dxi).sum()
    d_ls += (ratio * u * dlu_dls).sum()
    return np.array([d_xi, d_ls])


def _maximize(exc: ExceedanceSet, smooth_cdf: BernsteinCdf, xi: float, sigma: float | None):
    if exc.mode == "ratio":
        def nll(x):
            return -transform_loglik(exc, x[0], None, smooth_cdf)

        res = nelder_mead(nll, np.array([xi]), step=[0.05 * max(xi, 0.05)], xtol=1e-6)
        return float(res.x[0]), None, -res.fun, res.converged

    def nll(x):
        if not XI_BOX[0] <= x[0] <= XI_BOX[1]:
            return np.inf
        return -transform_loglik(exc, x[0], np.exp(x[1]), smooth_cdf)

    res = nelder_mead(nll, np.array([xi, np.log(sigma)]), step=[0.05, 0.08], xtol=1e-6)
    return float(res.x[0]), float(np.exp(res.x[1])), -res.fun, res.converged


def fit_transform(exc: ExceedanceSet, m: int, tol: float = 1e-6, max_iter: int = 50,
                  start: tuple[float, float | None] | None = None) -> TransformFit:
    """Run the iterative transformed fit at Bernstein degree m.

    The track follows the exceedance mode (difference -> GPD, ratio ->
    simple Pareto).  Stops once re-maximization gains less than ``tol`` in
    log likelihood; the previous iterate is then returned together with the
    Bernstein CDF built from it.  If the likelihood across accepted
    iterations decreases twice, the best iterate is returned flagged.
    """
    if exc.values.size < 5:
        raise ValueError("k must be >= 5 for a transformed fit")
    if m < 1:
        raise ValueError("Bernstein degree must be >= 1")
    track = "pareto" if exc.mode == "ratio" else "gpd"
    y = exc.values

    if start is not None:
        xi, sigma = start
    elif track == "pareto":
        xi, sigma = float(np.log(y).mean()), None
        if xi <= 0:
            raise ValueError("degenerate exceedances: all ratios equal 1")
    else:
        ml = fit_gpd_ml(exc)
        xi, sigma = ml.xi, ml.sigma

    best = None
    decreases = 0
    prev_ll = None
    trace: list[float] = []
    for it in range(max_iter):
        lu = _log_sf(track, xi, sigma, y)
        if lu is None:
            break
        z = np.clip(np.exp(lu), 1e-300, 1.0)
        smooth_cdf = fit_bernstein(z, m)
        ll_old = transform_loglik(exc, xi, sigma, smooth_cdf)
        xi_new, sigma_new, ll_new, _ = _maximize(exc, smooth_cdf, xi, sigma)
        moved = abs(xi_new - xi) + (0.0 if sigma is None else abs(np.log(sigma_new / sigma)))
        if ll_new - ll_old < tol * (1.0 + abs(ll_old)) or moved < 1e-4:  # fixed point
            fit = TransformFit(track, exc.k, exc.n, exc.threshold, xi, sigma,
                               smooth_cdf, m, it, True, ll_old)
            fit.loglik_trace = trace
            return fit
        candidate = TransformFit(track, exc.k, exc.n, exc.threshold, xi_new, sigma_new,
                                 smooth_cdf, m, it + 1, False, ll_new)
        if prev_ll is not None and ll_new < prev_ll - tol * (1.0 + abs(prev_ll)):
            decreases += 1
        else:
            trace.append(ll_new)
        if best is None or ll_new > best[0]:
            best = (ll_new, candidate)
        if decreases >= 2:
            best[1].loglik_trace = trace
            return best[1]  # oscillation: best iterate, flagged
        xi, sigma, prev_ll = xi_new, sigma_new, ll_new

    if best is not None:
        best[1].loglik_trace = trace
        return best[1]
    smooth_cdf = fit_bernstein(np.clip(np.exp(_log_sf(track, xi, sigma, y)), 1e-300, 1.0), m)
    fit = TransformFit(track, exc.k, exc.n, exc.threshold, xi, sigma, smooth_cdf,
                       m, max_iter, False, transform_loglik(exc, xi, sigma, smooth_cdf))
    fit.loglik_trace = trace
    return fit
