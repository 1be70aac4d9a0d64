"""Tail probabilities, extreme quantiles, asymptotic variances and GOF.

The asymptotic variance formulas for the extended fits follow the limit
theorem for the anchored likelihood roots.  The (xi, tau) covariance
degenerates as xi -> 0 (0/0 between the determinant and the numerators),
so the implementation rewrites the determinant as xi^2 times a
cancellation-free expression built from the stable difference quotient
J = integral of B(u) (u^xi - 1)/xi du; the xi = 0 limit then needs no
special casing beyond J's own limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri

from .bernstein import BernsteinCdf, fit_bernstein
from .empirical import ExceedanceSet, Sample, exceedances
from .extended import BiasFunction, ClampStats, ExtendedFit, extended_survival
from .gpd import XI_EPS, GpdFit, _sf_clipped
from .transform import TransformFit

__all__ = [
    "BiasMoments",
    "functionals",
    "var_xi_eplus",
    "var_xi_e",
    "cov_xi_tau_e",
    "ci_xi",
    "HillFit",
    "TailEstimate",
    "tail_prob",
    "tail_quantile",
    "GofResult",
    "gof_pp",
]

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class BiasMoments:
    """Integral moments of a bias shape used by the asymptotic variances.

    tail_mean          : int_0^1 B(u) du
    tail_mean_weighted : int_0^1 u^xi B(u) du
    density_sq_mean    : int_0^1 b(u)^2 du
    tail_mean_growth   : int_0^1 B(u) (u^xi - 1)/xi du  (log-weighted at xi=0)
    """

    tail_mean: float
    tail_mean_weighted: float
    density_sq_mean: float
    tail_mean_growth: float
    xi: float
    bias: BiasFunction | None = field(default=None, compare=False)


def _integrate(f) -> float:
    # subdivision at 1e-3 separates the integrable u^(2 xi) endpoint
    # singularity (xi < 0) from the smooth bulk
    a, _ = quad(f, 0.0, 1e-3, **_QUAD_OPTS)
    b, _ = quad(f, 1e-3, 1.0, **_QUAD_OPTS)
    return a + b


def functionals(bias: BiasFunction, xi: float) -> BiasMoments:
    """Quadrature of the bias-shape moments entering the variance formulas."""
    if xi <= -0.5:
        raise ValueError("xi must exceed -0.5")

    def tail(u):
        return float(bias.tail_factor(u))

    def tail_w(u):
        return u**xi * float(bias.tail_factor(u))

    def dens_sq(u):
        return float(bias.density_factor(u)) ** 2

    if xi == 0.0:
        def growth(u):
            return float(bias.tail_factor(u)) * np.log(u)
    else:
        def growth(u):
            return float(bias.tail_factor(u)) * np.expm1(xi * np.log(u)) / xi

    moments = BiasMoments(
        tail_mean=_integrate(tail),
        tail_mean_weighted=_integrate(tail_w),
        density_sq_mean=_integrate(dens_sq),
        tail_mean_growth=_integrate(growth),
        xi=float(xi),
        bias=bias,
    )
    if not np.isfinite(moments.density_sq_mean):
        raise ValueError("bias shape is not square integrable for this xi")
    return moments


def var_xi_eplus(xi: float, moments: BiasMoments, k: int) -> float:
    """Asymptotic variance of the extended-Pareto shape estimate at rank k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = moments.density_sq_mean
    gap = w - moments.tail_mean**2
    if w <= 0 or gap <= 1e-12 * max(w, 1.0):
        raise ValueError("degenerate bias shape: variance denominator vanishes")
    return xi**2 * w / gap / k


def _sigma_pieces(xi: float, moments: BiasMoments):
    eb = moments.tail_mean
    ec = moments.tail_mean_weighted
    w = moments.density_sq_mean
    j = moments.tail_mean_growth
    if w <= 0:
        raise ValueError("degenerate bias shape")
    c1 = (1.0 + xi) ** -2
    a = c1 / (1.0 + 2.0 * xi)
    p = a - ec**2 / w
    q = 1.0 - eb**2 / w
    r = c1 - eb * ec / w
    s_t = -2.0 * a - ec * j / w                       # (P - R)/xi
    w_t = (2.0 + xi) * c1 + eb * j / w                # (Q - R)/xi
    v_t = (5.0 + 2.0 * xi) * a - j**2 / w             # (s_t + w_t)/xi... exact sum
    denom = r * v_t + s_t * w_t                       # = D / xi^2, cancellation-free
    return p, q, r, denom


def var_xi_e(xi: float, moments: BiasMoments, k: int) -> float:
    """Asymptotic variance of the extended-GPD shape estimate at rank k.

    Stable for every xi > -1/2 including xi = 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    p, _, _, denom = _sigma_pieces(xi, moments)
    if denom <= 0:
        raise ValueError("singular design: variance denominator vanishes")
    return p / denom / k


def cov_xi_tau_e(xi: float, moments: BiasMoments, k: int) -> np.ndarray:
    """Asymptotic covariance of (xi-hat, tau-hat/tau - 1) at rank k.

    The tau-relative component carries a 1/xi pole, so |xi| >= 1e-6 is
    required; use var_xi_e for the shape variance at xi near 0.
    """
    if abs(xi) < XI_EPS:
        raise ValueError("tau-relative covariance degenerates at xi = 0; use var_xi_e")
    if xi <= -0.5:
        raise ValueError("xi must exceed -0.5")
    p, q, r, denom = _sigma_pieces(xi, moments)
    if abs(denom) <= 0:
        raise ValueError("singular design (D = 0)")
    s11 = p / denom
    s22 = q / (xi**2 * (1.0 + xi) ** 2 * denom)
    s12 = r / (xi * (1.0 + xi) * denom)
    return np.array([[s11, s12], [s12, s22]]) / k


def ci_xi(fit: ExtendedFit, moments: BiasMoments, level: float) -> tuple[float, float]:
    """Normal confidence interval for xi from the extended-model variances."""
    if not isinstance(fit, ExtendedFit):
        raise ValueError("confidence intervals are available for extended fits only")
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    if fit.track == "pareto":
        var = var_xi_eplus(fit.xi, moments, fit.k)
    else:
        var = var_xi_e(fit.xi, moments, fit.k)
    z = ndtri(0.5 * (1.0 + level)) if level > 0 else 0.0
    half = z * np.sqrt(var)
    return (fit.xi - half, fit.xi + half)


@dataclass
class HillFit:
    """Plain Pareto ML (Hill) fit, the delta = 0 baseline of the ratio track."""

    k: int
    n: int
    threshold: float
    xi: float
    converged: bool = True


@dataclass
class TailEstimate:
    method: str
    k: int
    kind: str  # "probability" or "quantile"
    value: float


def _fit_survival(fit, y, clamp_stats=None):
    """Survival of the fitted exceedance law at exceedance level y."""
    if isinstance(fit, HillFit):
        return float(np.asarray(y, dtype=float) ** (-1.0 / fit.xi))
    if isinstance(fit, GpdFit):
        return float(_sf_clipped(fit.xi, fit.sigma, y))
    if isinstance(fit, ExtendedFit):
        return float(extended_survival(fit, y, clamp_stats))
    if isinstance(fit, TransformFit):
        if fit.track == "pareto":
            u = np.asarray(y, dtype=float) ** (-1.0 / fit.xi)
        else:
            u = _sf_clipped(fit.xi, fit.sigma, y)
        return float(np.clip(fit.smooth_cdf.cdf(np.clip(u, 0.0, 1.0)), 0.0, 1.0))
    raise TypeError(f"unsupported fit type {type(fit).__name__}")


def _method_tag(fit) -> str:
    return {
        HillFit: "pareto-ml",
        GpdFit: "gpd-ml",
        ExtendedFit: "extended",
        TransformFit: "transformed",
    }[type(fit)]


def _is_ratio_track(fit) -> bool:
    if isinstance(fit, HillFit):
        return True
    if isinstance(fit, GpdFit):
        return False
    return fit.track == "pareto"


def tail_prob(fit, c: float, n: int, clamp_stats: ClampStats | None = None) -> TailEstimate:
    """Estimate P(X > c) as (k/n) times the fitted exceedance survival."""
    c = float(c)
    if c < fit.threshold:
        raise ValueError("c must not lie below the threshold")
    if _is_ratio_track(fit):
        y = c / fit.threshold
    else:
        y = c - fit.threshold
    p = fit.k / n * _fit_survival(fit, y, clamp_stats)
    return TailEstimate(_method_tag(fit), fit.k, "probability", float(np.clip(p, 0.0, 1.0)))


def tail_quantile(fit, p: float, n: int) -> TailEstimate:
    """Invert the tail-probability estimator: the level c with P(X > c) = p."""
    p = float(p)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if p >= fit.k / n:
        raise ValueError("p is inside the empirical range; use an empirical quantile")
    t = fit.threshold

    def prob(c):
        return tail_prob(fit, c, n).value

    # bracket: double upward for heavy tails, cap at the model endpoint otherwise
    xi = fit.xi
    if not _is_ratio_track(fit) and xi < -XI_EPS:
        sigma = fit.sigma
        hi = t + sigma / -xi
        lo = t
    else:
        lo, hi = t, max(2.0 * abs(t), t + 1.0)
        for _ in range(400):
            if prob(hi) <= p:
                break
            lo = hi
            hi = t + 2.0 * (hi - t)
        else:
            raise RuntimeError("failed to bracket the quantile")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = prob(mid)
        if abs(val - p) <= 1e-12 * p:
            return TailEstimate(_method_tag(fit), fit.k, "quantile", float(mid))
        if val > p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return TailEstimate(_method_tag(fit), fit.k, "quantile", float(0.5 * (lo + hi)))


@dataclass
class GofResult:
    points: np.ndarray  # (n, 2): log((n+1)/j) vs -log smoothed composite CDF
    correlation: float
    smooth_cdf: BernsteinCdf


def gof_pp(sample: Sample, xi0: float, sigma0: float, m: int) -> GofResult:
    """Transformed P-P plot for the complete-sample composite fit at (xi0, sigma0).

    The transformation CDF is estimated by a single smoothing step at k = n
    and the points compare empirical against fitted log survival levels;
    their Pearson correlation summarizes the fit.
    """
    if sigma0 <= 0:
        raise ValueError("sigma0 must be > 0")
    exc = exceedances(sample, sample.n, "difference")
    y = exc.values
    if xi0 < -XI_EPS and y[0] >= sigma0 / -xi0:
        raise ValueError("(xi0, sigma0) violates the data support")
    z = np.clip(_sf_clipped(xi0, sigma0, y), 1e-300, 1.0)
    smooth_cdf = fit_bernstein(z, m)
    n = sample.n
    j = np.arange(1, n + 1)
    x = np.log((n + 1) / j)
    yy = -np.log(np.maximum(smooth_cdf.cdf(z), 1e-300))
    corr = float(np.corrcoef(x, yy)[0, 1])
    return GofResult(np.column_stack([x, yy]), corr, smooth_cdf)
