"""Small derivative-free simplex minimizer tuned for 1-3 parameter likelihoods.

Objectives may return +inf outside their feasible region; the simplex treats
such vertices as arbitrarily bad.  Deterministic: no randomness anywhere.
"""

from __future__ import annotations

import numpy as np

__all__ = ["nelder_mead", "NMResult"]


class NMResult:
    __slots__ = ("x", "fun", "n_iter", "converged")

    def __init__(self, x, fun, n_iter, converged):
        self.x = x
        self.fun = fun
        self.n_iter = n_iter
        self.converged = converged


def nelder_mead(f, x0, step, xtol=1e-9, ftol=1e-12, max_iter=500) -> NMResult:
    """Minimize f from x0 with initial simplex offsets ``step`` per coordinate."""
    x0 = np.asarray(x0, dtype=float)
    step = np.broadcast_to(np.asarray(step, dtype=float), x0.shape)
    d = x0.size
    verts = np.tile(x0, (d + 1, 1))
    for i in range(d):
        verts[i + 1, i] += step[i]
    fvals = np.array([f(v) for v in verts])
    if not np.isfinite(fvals).any():
        return NMResult(x0, np.inf, 0, False)

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        verts, fvals = verts[order], fvals[order]
        best, worst = fvals[0], fvals[-1]
        if np.isfinite(worst):
            fspread = worst - best
            xspread = np.max(np.abs(verts[1:] - verts[0]))
            if fspread <= ftol * (1.0 + abs(best)) and xspread <= xtol:
                return NMResult(verts[0], best, n_iter, True)

        centroid = verts[:-1].mean(axis=0)
        xr = centroid + (centroid - verts[-1])
        fr = f(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - verts[-1])
            fe = f(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (verts[-1] - centroid)
            fc = f(xc)
            if fc < min(fr, fvals[-1]):
                verts[-1], fvals[-1] = xc, fc
            else:  # shrink toward the best vertex
                verts[1:] = verts[0] + 0.5 * (verts[1:] - verts[0])
                fvals[1:] = [f(v) for v in verts[1:]]

    order = np.argsort(fvals, kind="stable")
    return NMResult(verts[order[0]], fvals[order[0]], n_iter, False)
