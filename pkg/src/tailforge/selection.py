"""Per-k estimate paths and minimum-variance hyperparameter selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empirical import KPath, Sample, exceedances
from .extended import BernsteinBias, GpdSecondOrderBias, ParetoPowerBias, fit_extended_gpd, fit_extended_pareto
from .gpd import fit_gpd_ml
from .inference import HillFit, tail_prob
from .transform import fit_transform

__all__ = ["METHODS", "MethodConfig", "k_path", "min_variance_select", "default_grid"]

METHODS = ("pareto-ml", "gpd-ml", "ep", "ep+", "ebar", "ebar+", "tbar", "tbar+")

_RATIO_TRACK = {"pareto-ml", "ep+", "ebar+", "tbar+"}
_MIN_K = {"pareto-ml": 2}  # everything else needs 5 points


@dataclass(frozen=True)
class MethodConfig:
    """An estimation method plus the hyperparameters it needs.

    ep    needs rho_tilde (xi0 optional: imputed from GPD-ML per k when absent)
    ep+   needs rho
    ebar  / ebar+ need (kstar, m)
    tbar  / tbar+ need a (Bernstein degree exponent, m = round(k^a))
    """

    method: str
    rho: float | None = None
    rho_tilde: float | None = None
    xi0: float | None = None
    a: float | None = None
    kstar: int | None = None
    m: int | None = None
    tol: float = 1e-6
    max_iter: int = 50

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        need = {
            "ep": ("rho_tilde",),
            "ep+": ("rho",),
            "ebar": ("kstar", "m"),
            "ebar+": ("kstar", "m"),
            "tbar": ("a",),
            "tbar+": ("a",),
        }.get(self.method, ())
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"method {self.method!r} needs hyperparameter {name!r}")

    @property
    def min_k(self) -> int:
        return _MIN_K.get(self.method, 5)

    @property
    def ratio_track(self) -> bool:
        return self.method in _RATIO_TRACK

    def label(self) -> str:
        parts = []
        for name in ("rho", "rho_tilde", "xi0", "a", "kstar", "m"):
            val = getattr(self, name)
            if val is not None:
                parts.append(f"{name}={val:g}")
        return self.method if not parts else f"{self.method}({' '.join(parts)})"

    def to_dict(self) -> dict:
        doc = {"method": self.method}
        for name in ("rho", "rho_tilde", "xi0", "a", "kstar", "m"):
            val = getattr(self, name)
            if val is not None:
                doc[name] = val
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "MethodConfig":
        known = {k: v for k, v in doc.items()
                 if k in ("method", "rho", "rho_tilde", "xi0", "a", "kstar", "m", "tol", "max_iter")}
        if "kstar" in known:
            known["kstar"] = int(known["kstar"])
        if "m" in known:
            known["m"] = int(known["m"])
        return cls(**known)


def _bernstein_bias(sample: Sample, cfg: MethodConfig) -> BernsteinBias:
    """Nonparametric bias shape: transformation CDF fitted at rank kstar."""
    mode = "ratio" if cfg.ratio_track else "difference"
    exc = exceedances(sample, cfg.kstar, mode)
    tf = fit_transform(exc, cfg.m, tol=cfg.tol, max_iter=cfg.max_iter)
    return BernsteinBias(tf.smooth_cdf)


def default_k_range(n: int, min_k: int = 5) -> np.ndarray:
    return np.arange(min_k, n)


def k_path(sample: Sample, cfg: MethodConfig, k_range=None, tail_at=None) -> KPath:
    """One fit per k; failed ks are flagged with NaN estimates, never dropped.

    ``tail_at``: optional anchor points c at which each fit's tail
    probability estimate is recorded.  Deterministic given (sample, cfg).
    """
    n = sample.n
    if k_range is None:
        k_range = default_k_range(n, cfg.min_k)
    ks = np.asarray(sorted(set(int(k) for k in k_range)), dtype=int)
    if ks.size == 0 or ks[0] < cfg.min_k or ks[-1] > n:
        raise ValueError(f"k range must lie within [{cfg.min_k}, {n}]")
    tail_at = [] if tail_at is None else [float(c) for c in tail_at]

    bias_fixed = None
    if cfg.method in ("ebar", "ebar+"):
        bias_fixed = _bernstein_bias(sample, cfg)

    xi = np.full(ks.size, np.nan)
    sigma = np.full(ks.size, np.nan)
    delta = np.full(ks.size, np.nan)
    conv = np.zeros(ks.size, dtype=bool)
    tails = {c: np.full(ks.size, np.nan) for c in tail_at}
    fits: list = [None] * ks.size

    prev_ml = None
    prev_fit = None
    mode = "ratio" if cfg.ratio_track else "difference"
    for i, k in enumerate(ks):
        try:
            exc = exceedances(sample, int(k), mode)
            if cfg.method == "pareto-ml":
                h = float(np.mean(np.log(exc.values)))
                fit = HillFit(int(k), n, exc.threshold, h)
            elif cfg.method == "gpd-ml":
                fit = fit_gpd_ml(exc, start=prev_ml)
                prev_ml = (fit.xi, fit.sigma)
            elif cfg.method in ("ep", "ebar"):
                ml = fit_gpd_ml(exc, start=prev_ml)
                prev_ml = (ml.xi, ml.sigma)
                if cfg.method == "ep":
                    bias = GpdSecondOrderBias(cfg.xi0 if cfg.xi0 is not None else ml.xi,
                                              cfg.rho_tilde)
                else:
                    bias = bias_fixed
                start = prev_fit if prev_fit is not None else (ml.xi, ml.sigma)
                fit = fit_extended_gpd(exc, bias, start=start)
                prev_fit = (fit.xi, fit.sigma)
            elif cfg.method in ("ep+", "ebar+"):
                bias = ParetoPowerBias(cfg.rho) if cfg.method == "ep+" else bias_fixed
                h = float(np.mean(np.log(exc.values)))
                fit = fit_extended_pareto(exc, bias, start=(prev_fit if prev_fit is not None else h))
                prev_fit = fit.xi
            else:  # tbar / tbar+
                m = cfg.m if cfg.m is not None else max(1, round(int(k) ** cfg.a))
                fit = fit_transform(exc, m, tol=cfg.tol, max_iter=cfg.max_iter)
        except (ValueError, RuntimeError):
            continue
        fits[i] = fit
        xi[i] = fit.xi
        s = getattr(fit, "sigma", None)
        sigma[i] = np.nan if s is None else s
        d = getattr(fit, "delta", None)
        delta[i] = np.nan if d is None else d
        conv[i] = getattr(fit, "converged", True)
        for c in tail_at:
            try:
                tails[c][i] = tail_prob(fit, c, n).value
            except ValueError:
                pass

    path = KPath(method=cfg.label(), k=ks, xi=xi, sigma=sigma, delta=delta,
                 converged=conv, tail_probs=tails)
    path.fits = fits
    return path


def selection_k_range(n: int, points: int = 15, min_k: int = 10) -> np.ndarray:
    """Thinned k grid used when scoring hyperparameter candidates."""
    hi = max(n - 10, min_k + 1)
    return np.unique(np.linspace(min_k, hi, points).round().astype(int))


def path_variance_score(path: KPath) -> float:
    """Dispersion of the shape estimates over k: sum of squares around the mean."""
    good = path.converged & np.isfinite(path.xi)
    if not good.any():
        return np.inf
    x = path.xi[good]
    return float(np.sum((x - x.mean()) ** 2))


def min_variance_select(sample: Sample, grid: list[MethodConfig], k_range=None) -> MethodConfig:
    """Pick the candidate whose shape-estimate path is most stable over k.

    Candidates whose path converged on fewer than 80 percent of the k grid
    are disqualified; ties break toward the earliest grid entry.
    """
    if not grid:
        raise ValueError("empty candidate grid")
    if k_range is None:
        k_range = selection_k_range(sample.n)
    best = None
    for idx, cand in enumerate(grid):
        try:
            path = k_path(sample, cand, k_range=k_range)
        except (ValueError, RuntimeError):
            continue
        ok = path.converged & np.isfinite(path.xi)
        if ok.sum() < 0.8 * len(path):
            continue
        score = path_variance_score(path)
        if best is None or score < best[0] - 1e-15:
            best = (score, idx, cand)
    if best is None:
        raise ValueError("every candidate failed the convergence requirement")
    return best[2]


def default_grid(method: str, n: int) -> list[MethodConfig]:
    """Hyperparameter candidates mirroring the interactive slider ranges."""
    if method in ("tbar", "tbar+"):
        return [MethodConfig(method, a=a) for a in (0.5, 0.6, 0.7, 0.8, 0.9, 0.99)]
    if method == "ep":
        return [MethodConfig(method, rho_tilde=r) for r in (-0.25, -0.5, -1.0, -2.0)]
    if method == "ep+":
        return [MethodConfig(method, rho=r) for r in (-0.25, -0.5, -1.0, -2.0)]
    if method in ("ebar", "ebar+"):
        grid = []
        for kstar in (n // 4, n // 2, 3 * n // 4):
            for m in (10, 25, 50, min(100, kstar)):
                grid.append(MethodConfig(method, kstar=kstar, m=m))
        return grid
    raise ValueError(f"no hyperparameter grid for method {method!r}")
