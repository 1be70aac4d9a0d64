"""Classical first-order POT fits: generalized Pareto maximum likelihood.

Parametrized by (xi, sigma) internally, with tau = xi/sigma exposed for the
reparametrized likelihood.  The optimizer is a derivative-free simplex over
(xi, log sigma) from a fixed four-point multistart schedule, followed by a
Newton polish on the analytic score; everything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import ExceedanceSet
from .optim import nelder_mead

__all__ = ["GpdParams", "GpdFit", "gpd_survival", "gpd_loglik", "gpd_loglik_grad", "fit_gpd_ml"]

XI_EPS = 1e-6
XI_BOX = (-0.49, 5.0)


@dataclass(frozen=True)
class GpdParams:
    """Shape xi > -0.5 and scale sigma > 0; tau = xi/sigma."""

    xi: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite(self.xi) or not np.isfinite(self.sigma):
            raise ValueError("parameters must be finite")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.xi <= -0.5:
            raise ValueError("xi must exceed -0.5 for inference")

    @property
    def tau(self) -> float:
        return self.xi / self.sigma


def gpd_survival(params: GpdParams, y):
    """(1 + tau*y)^(-1/xi) for y >= 0; exponential limit below |xi| = 1e-6."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be >= 0")
    xi, sigma = params.xi, params.sigma
    if xi < -XI_EPS and np.any(y >= sigma / -xi):
        raise ValueError("y beyond the upper endpoint sigma/|xi|")
    out = _sf_clipped(xi, sigma, y)
    return float(out) if out.ndim == 0 else out


def _sf_clipped(xi: float, sigma: float, y) -> np.ndarray:
    """Survival of the excess law, 0 beyond a finite endpoint (no raising)."""
    z = np.asarray(y, dtype=float) / sigma
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if abs(xi) < XI_EPS:
            return np.exp(-z)
        arg = 1.0 + xi * z
        return np.where(arg > 0, np.maximum(arg, 1e-300) ** (-1.0 / xi), 0.0)


def gpd_loglik(params: GpdParams, exc: ExceedanceSet) -> float:
    """Exact GPD log likelihood of difference-mode exceedances; -inf off support."""
    return _nll_xi_logsig(params.xi, np.log(params.sigma), exc.values) * -1.0


def _nll_xi_logsig(xi: float, logsig: float, y: np.ndarray) -> float:
    if not XI_BOX[0] <= xi <= XI_BOX[1]:
        return np.inf
    sigma = np.exp(logsig)
    k = y.size
    if abs(xi) < XI_EPS:
        return k * logsig + y.sum() / sigma
    if xi < 0 and y[0] * -xi >= sigma:  # values stored largest first
        return np.inf
    return k * logsig + (1.0 + 1.0 / xi) * np.log1p(xi / sigma * y).sum()


def gpd_loglik_grad(params: GpdParams, exc: ExceedanceSet) -> np.ndarray:
    """Analytic gradient (d/dxi, d/dsigma) of gpd_loglik."""
    xi, sigma = params.xi, params.sigma
    y = exc.values
    k = y.size
    z = y / sigma
    if abs(xi) < XI_EPS:
        return np.array([0.5 * (z**2).sum() - z.sum(), (-k + z.sum()) / sigma])
    arg = 1.0 + xi * z
    if np.any(arg <= 0):
        raise ValueError("parameters violate the data support")
    s1 = np.log1p(xi * z).sum()
    s2 = (z / arg).sum()
    d_xi = s1 / xi**2 - (1.0 + 1.0 / xi) * s2
    d_sigma = (-k + (1.0 + xi) * s2) / sigma
    return np.array([d_xi, d_sigma])


@dataclass
class GpdFit:
    """Result of a GPD ML fit on one exceedance set."""

    k: int
    n: int
    threshold: float
    xi: float
    sigma: float
    loglik: float
    converged: bool
    grad_norm: float

    @property
    def tau(self) -> float:
        return self.xi / self.sigma

    @property
    def params(self) -> GpdParams:
        return GpdParams(self.xi, self.sigma)


def _moment_start(y: np.ndarray) -> tuple[float, float]:
    m1, v = y.mean(), y.var()
    if v <= 0 or m1 <= 0:
        return 0.1, max(float(np.abs(y).mean()), 1e-12)
    xi0 = 0.5 * (1.0 - m1**2 / v)
    xi0 = float(np.clip(xi0, -0.45, 3.0))
    return xi0, float(m1 * max(1.0 - xi0, 0.1))


def _grad_xi_logsig(xi: float, logsig: float, y: np.ndarray) -> np.ndarray:
    sigma = np.exp(logsig)
    k = y.size
    z = y / sigma
    if abs(xi) < XI_EPS:
        return np.array([0.5 * (z**2).sum() - z.sum(), -k + z.sum()])
    arg = 1.0 + xi * z
    s1 = np.log1p(xi * z).sum()
    s2 = (z / arg).sum()
    return np.array([s1 / xi**2 - (1.0 + 1.0 / xi) * s2, -k + (1.0 + xi) * s2])


def _grad_hess_xi_logsig(xi: float, logsig: float, y: np.ndarray):
    """Score and Hessian of the log likelihood in (xi, log sigma), |xi| >= 1e-5."""
    sigma = np.exp(logsig)
    k = y.size
    z = y / sigma
    arg = 1.0 + xi * z
    s1 = np.log1p(xi * z).sum()
    r = z / arg
    s2 = r.sum()
    s3 = (r * r).sum()
    g = np.array([s1 / xi**2 - (1.0 + 1.0 / xi) * s2, -k + (1.0 + xi) * s2])
    h11 = -2.0 * s1 / xi**3 + 2.0 * s2 / xi**2 + (1.0 + 1.0 / xi) * s3
    h12 = s2 - (1.0 + xi) * s3
    h22 = (1.0 + xi) * (xi * s3 - s2)
    return g, np.array([[h11, h12], [h12, h22]])


def _newton_polish(x: np.ndarray, y: np.ndarray, nll):
    """Damped Newton on the score in (xi, log sigma); returns (x, nll(x))."""
    fx = nll(x)
    k = y.size
    for _ in range(6):
        if not np.isfinite(fx) or abs(x[0]) < 1e-5:
            break
        try:
            g, hess = _grad_hess_xi_logsig(x[0], x[1], y)
        except FloatingPointError:
            break
        if np.linalg.norm(g) < 1e-10 * k:
            break
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        improved = False
        for _ in range(4):
            cand = x + scale * step
            fc = nll(cand)
            if np.isfinite(fc) and fc <= fx + 1e-12:
                x, fx, improved = cand, fc, True
                break
            scale *= 0.25
        if not improved:
            break
    if np.isfinite(fx) and (x[0] - XI_BOX[0] < 1e-5 or XI_BOX[1] - x[0] < 1e-5):
        x, fx = _polish_scale_at_bound(x, fx, y, nll)
    return x, fx


def _polish_scale_at_bound(x: np.ndarray, fx: float, y: np.ndarray, nll):
    """Shape pinned at the feasibility box: Newton on the scale score alone."""
    x = x.copy()
    x[0] = XI_BOX[0] if x[0] - XI_BOX[0] < 1e-5 else XI_BOX[1]
    fx = nll(x)
    xi = x[0]
    for _ in range(8):
        sigma = np.exp(x[1])
        z = y / sigma
        arg = 1.0 + xi * z
        if np.any(arg <= 0):
            break
        r = z / arg
        s2 = r.sum()
        g = -y.size + (1.0 + xi) * s2
        h = (1.0 + xi) * (xi * (r * r).sum() - s2)
        if h >= 0 or abs(g) < 1e-11 * y.size:
            break
        cand = x.copy()
        cand[1] -= g / h
        fc = nll(cand)
        if not np.isfinite(fc) or fc > fx + 1e-12:
            break
        x, fx = cand, fc
    return x, fx


def fit_gpd_ml(exc: ExceedanceSet, start: tuple[float, float] | None = None) -> GpdFit:
    """Maximum likelihood (xi, sigma) over the feasible region.

    ``start`` is an optional (xi, sigma) warm start, e.g. the neighbouring
    fit along a k-path.  Results are deterministic given the exceedances.
    """
    if exc.mode != "difference":
        raise ValueError("GPD fits take difference-mode exceedances")
    y = exc.values
    if y.size < 5:
        raise ValueError("k must be >= 5 for a GPD fit")
    if np.ptp(y) == 0:
        raise ValueError("degenerate exceedances: all values equal")

    def nll(x):
        return _nll_xi_logsig(x[0], x[1], y)

    xi0, sig0 = _moment_start(y)
    moment = np.array([xi0, np.log(sig0)])
    if start is not None:
        # polish-first warm path: cheap when the previous optimum is close
        warm = np.array([np.clip(start[0], XI_BOX[0] + 1e-6, XI_BOX[1] - 1e-6), np.log(start[1])])
        x, fx = _newton_polish(warm.copy(), y, nll)
        if np.isfinite(fx) and fx <= nll(moment) and (
                _scaled_gnorm(x, y) < 1e-8 or _kkt_at_box(x, y)):
            return _build_fit(exc, x, fx, y, True)
        res = nelder_mead(nll, warm, step=[0.05, 0.08], xtol=2e-4)
        if res.fun <= nll(moment):
            return _finish(exc, res, y, nll)
    starts = [
        moment,
        moment + [0.5 if xi0 < 2.5 else -0.5, 0.0],
        np.array([max(xi0 - 0.5, -0.45), moment[1]]),
        moment + [0.0, 0.7],
    ]
    best = None
    for s in starts:
        res = nelder_mead(nll, s, step=[0.25, 0.35], xtol=2e-4)
        if best is None or res.fun < best.fun:
            best = res
    return _finish(exc, best, y, nll)


def _scaled_gnorm(x: np.ndarray, y: np.ndarray) -> float:
    try:
        return float(np.linalg.norm(_grad_xi_logsig(x[0], x[1], y))) / y.size
    except (ValueError, FloatingPointError):
        return np.inf


def _finish(exc: ExceedanceSet, res, y: np.ndarray, nll) -> GpdFit:
    x, fx = _newton_polish(res.x.copy(), y, nll)
    return _build_fit(exc, x, fx, y, res.converged)


def _kkt_at_box(x: np.ndarray, y: np.ndarray) -> bool:
    """Stationarity for a shape estimate pinned at the feasibility box."""
    try:
        g = _grad_xi_logsig(x[0], x[1], y)
    except (ValueError, FloatingPointError):
        return False
    if abs(g[1]) / y.size >= 1e-8:
        return False
    if x[0] <= XI_BOX[0] + 1e-6:
        return g[0] <= 0  # the likelihood pushes below the box
    if x[0] >= XI_BOX[1] - 1e-6:
        return g[0] >= 0
    return False


def _build_fit(exc: ExceedanceSet, x, fx, y, opt_ok: bool) -> GpdFit:
    gnorm = _scaled_gnorm(x, y)
    stationary = gnorm < 1e-8 or _kkt_at_box(x, y)
    return GpdFit(
        k=exc.k,
        n=exc.n,
        threshold=exc.threshold,
        xi=float(x[0]),
        sigma=float(np.exp(x[1])),
        loglik=-fx,
        converged=bool(opt_ok and np.isfinite(fx) and stationary),
        grad_norm=gnorm,
    )
