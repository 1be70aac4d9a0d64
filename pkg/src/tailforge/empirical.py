"""Order statistics, exceedance sets, the Hill estimator and k-path utilities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Sample",
    "ExceedanceSet",
    "KPath",
    "exceedances",
    "hill",
    "empirical_cdf",
    "moving_average",
]


@dataclass(frozen=True)
class Sample:
    """Ascending-sorted finite observations."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a sample needs at least 2 one-dimensional values")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        v = np.sort(v, kind="stable")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def order_stat(self, rank: int) -> float:
        """X_{rank,n}, rank counted from 1 (smallest)."""
        return float(self.values[rank - 1])


@dataclass(frozen=True)
class ExceedanceSet:
    """Top-k exceedances over the random threshold X_{n-k,n}.

    ``difference`` mode holds excesses X - t >= 0, ``ratio`` mode holds
    X / t >= 1 (requiring t > 0).  Values are stored largest first.
    """

    k: int
    threshold: float
    mode: str
    values: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if self.mode not in ("difference", "ratio"):
            raise ValueError("mode must be 'difference' or 'ratio'")
        if v.size != self.k:
            raise ValueError("value count must equal k")
        if self.mode == "difference" and np.any(v < 0):
            raise ValueError("difference-mode exceedances must be >= 0")
        if self.mode == "ratio":
            if self.threshold <= 0:
                raise ValueError("ratio mode needs a positive threshold")
            if np.any(v < 1):
                raise ValueError("ratio-mode exceedances must be >= 1")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def exceedances(sample: Sample, k: int, mode: str = "difference") -> ExceedanceSet:
    """Build the exceedance set at rank k.

    For k = n the complete-sample convention applies: difference mode uses
    threshold 0 (the reversely ordered data), ratio mode divides by the
    sample minimum, which must be positive.
    """
    n = sample.n
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in [2, {n}]")
    x = sample.values
    top = x[n - k:][::-1]  # descending
    if k == n:
        if mode == "difference":
            if x[0] < 0:
                raise ValueError("k = n in difference mode needs nonnegative data")
            return ExceedanceSet(k, 0.0, mode, top, n)
        t = x[0]
        if t <= 0:
            raise ValueError("k = n in ratio mode needs a positive minimum")
        return ExceedanceSet(k, float(t), mode, top / t, n)
    t = x[n - k - 1]
    if mode == "difference":
        return ExceedanceSet(k, float(t), mode, top - t, n)
    if t <= 0:
        raise ValueError("ratio mode needs a positive threshold")
    return ExceedanceSet(k, float(t), mode, top / t, n)


def hill(sample: Sample, k: int) -> float:
    """Mean of the top-k log ratios: the Pareto ML estimator of the tail index."""
    n = sample.n
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}]")
    t = sample.values[n - k - 1]
    if t <= 0:
        raise ValueError("threshold X_{n-k,n} must be positive")
    return float(np.mean(np.log(sample.values[n - k:] / t)))


class EmpiricalCdf:
    """Right-continuous step function u -> #{values <= u} / count."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=float))
        if v.size == 0:
            raise ValueError("empirical CDF needs at least one value")
        self._sorted = v

    def __call__(self, u):
        idx = np.searchsorted(self._sorted, u, side="right")
        out = idx / self._sorted.size
        return float(out) if np.isscalar(u) else out


def empirical_cdf(values) -> EmpiricalCdf:
    return EmpiricalCdf(values)


@dataclass
class KPath:
    """Per-k estimates for one method: the unit of stability analysis.

    Arrays are parallel to ``k``; entries that could not be fitted carry
    NaN estimates with ``converged`` False.  ``tail_probs`` maps an anchor
    point c to the per-k tail probability estimates at that point.
    """

    method: str
    k: np.ndarray
    xi: np.ndarray
    sigma: np.ndarray
    delta: np.ndarray
    converged: np.ndarray
    tail_probs: dict[float, np.ndarray] = field(default_factory=dict)
    fits: list | None = None

    def __post_init__(self):
        self.k = np.asarray(self.k, dtype=int)
        if self.k.size and np.any(np.diff(self.k) <= 0):
            raise ValueError("k must be strictly increasing")
        for name in ("xi", "sigma", "delta"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        self.converged = np.asarray(self.converged, dtype=bool)

    def __len__(self) -> int:
        return self.k.size


def _smooth_series(series: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    out = np.empty_like(series)
    for i in range(series.size):
        lo, hi = max(0, i - half), min(series.size, i + half + 1)
        chunk = series[lo:hi]
        good = np.isfinite(chunk)
        out[i] = chunk[good].mean() if good.any() else np.nan
    return out


def moving_average(path: KPath, window: int) -> KPath:
    """Centered moving average of every estimate series; truncated at the edges."""
    if window % 2 == 0 or window < 1:
        raise ValueError("window must be odd and positive")
    if window > len(path):
        raise ValueError("window exceeds path length")
    return KPath(
        method=path.method,
        k=path.k.copy(),
        xi=_smooth_series(path.xi, window),
        sigma=_smooth_series(path.sigma, window),
        delta=_smooth_series(path.delta, window),
        converged=path.converged.copy(),
        tail_probs={c: _smooth_series(v, window) for c, v in path.tail_probs.items()},
    )
