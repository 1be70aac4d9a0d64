"""Monte Carlo harness: bias and RMSE curves over k per method and distribution.

Replication r draws its sample with seed base_seed XOR r, so any subset of
replications can be recomputed independently; aggregation uses exact
summation (math.fsum) and is therefore invariant to replication order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, sample as draw_sample, tail_anchor
from .empirical import Sample
from .selection import MethodConfig, k_path, min_variance_select, selection_k_range

__all__ = ["SimMethod", "ExperimentSpec", "CurveSet", "run_experiment",
           "export_curves", "import_curves"]

LOG_CAP = 50.0
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SimMethod:
    """A method entry of an experiment: fixed hyperparameters plus an
    optional per-sample selection grid ("rho_tilde": (-0.25, -0.5, ...))
    resolved by the minimum-variance principle on each replication."""

    method: str
    params: dict = field(default_factory=dict)
    select: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.select:
            probe = dict(self.params)
            for name, values in self.select.items():
                probe[name] = values[0]
            MethodConfig(self.method, **probe)  # validate completeness
        else:
            MethodConfig(self.method, **self.params)

    def label(self) -> str:
        parts = [f"{k}={v:g}" for k, v in sorted(self.params.items())]
        parts += [f"{k}=minvar" for k in sorted(self.select)]
        return self.method if not parts else f"{self.method}({' '.join(parts)})"

    def resolve(self, s: Sample) -> MethodConfig:
        if not self.select:
            return MethodConfig(self.method, **self.params)
        names = sorted(self.select)
        combos = [{}]
        for name in names:
            combos = [dict(c, **{name: v}) for c in combos for v in self.select[name]]
        grid = [MethodConfig(self.method, **dict(self.params, **combo)) for combo in combos]
        return min_variance_select(s, grid, k_range=selection_k_range(s.n))

    def to_dict(self) -> dict:
        doc = {"method": self.method, **self.params}
        if self.select:
            doc["select"] = {k: list(v) for k, v in self.select.items()}
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SimMethod":
        doc = dict(doc)
        method = doc.pop("method")
        select = {k: tuple(v) for k, v in doc.pop("select", {}).items()}
        return cls(method, params=doc, select=select)


def default_k_grid(n: int) -> tuple[int, ...]:
    if n <= 200:
        return tuple(range(5, n))
    return tuple(int(v) for v in np.unique(np.geomspace(5, n - 1, 100).round().astype(int)))


def default_burr_spec(replications: int = 500) -> "ExperimentSpec":
    """The bundled demonstration experiment: heavy-tailed Burr data, the two
    classical baselines, and the power-bias extended fits at the reference
    second-order rates -0.5 and -1."""
    return ExperimentSpec(
        distribution=DistributionSpec.burr(1, 2),
        n=200,
        replications=replications,
        methods=(SimMethod("pareto-ml"), SimMethod("gpd-ml"),
                 SimMethod("ep+", {"rho": -0.5}), SimMethod("ep+", {"rho": -1.0})),
        p_targets=(0.005, 0.003),
        base_seed=20260810,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    distribution: DistributionSpec
    n: int
    replications: int
    methods: tuple[SimMethod, ...]
    p_targets: tuple[float, ...] = (0.005, 0.003)
    base_seed: int = 20260810
    smoothing_window: int = 1
    k_grid: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.n < 10:
            raise ValueError("n must be >= 10")
        for p in self.p_targets:
            if not 0 < p < 0.5:
                raise ValueError("tail probability targets must lie in (0, 0.5)")
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ValueError("smoothing window must be odd and positive")
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "p_targets", tuple(float(p) for p in self.p_targets))
        if self.k_grid is not None:
            object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))

    def to_dict(self) -> dict:
        doc = {
            "distribution": self.distribution.to_dict(),
            "n": self.n,
            "replications": self.replications,
            "methods": [m.to_dict() for m in self.methods],
            "p_targets": list(self.p_targets),
            "base_seed": self.base_seed,
            "smoothing_window": self.smoothing_window,
        }
        if self.k_grid is not None:
            doc["k_grid"] = list(self.k_grid)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        return cls(
            distribution=DistributionSpec.from_dict(doc["distribution"]),
            n=int(doc["n"]),
            replications=int(doc["replications"]),
            methods=tuple(SimMethod.from_dict(m) for m in doc["methods"]),
            p_targets=tuple(doc.get("p_targets", (0.005, 0.003))),
            base_seed=int(doc.get("base_seed", 20260810)),
            smoothing_window=int(doc.get("smoothing_window", 1)),
            k_grid=tuple(doc["k_grid"]) if doc.get("k_grid") else None,
        )


@dataclass
class CurveSet:
    """Aggregated bias/RMSE curves; column-major with a pinned column order."""

    columns: list[str]
    rows: list[list]
    p_targets: tuple[float, ...]
    errors: dict[str, str] = field(default_factory=dict)

    def column(self, name: str, method: str | None = None) -> np.ndarray:
        idx = self.columns.index(name)
        rows = self.rows if method is None else [r for r in self.rows if r[0] == method]
        return np.array([r[idx] for r in rows])

    def methods(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r[0] not in seen:
                seen.append(r[0])
        return seen


def _fsum_mean(values: list[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def _smooth(values: list[float], window: int) -> list[float]:
    if window <= 1:
        return values
    half = window // 2
    out = []
    for i in range(len(values)):
        lo, hi = max(0, i - half), min(len(values), i + half + 1)
        chunk = [v for v in values[lo:hi] if not math.isnan(v)]
        out.append(math.fsum(chunk) / len(chunk) if chunk else math.nan)
    return out


def _replicate(spec: ExperimentSpec, r: int):
    """One replication: per-method xi estimates and tail probabilities."""
    dist = spec.distribution
    k_grid = spec.k_grid if spec.k_grid is not None else default_k_grid(spec.n)
    anchors = [tail_anchor(dist, p) for p in spec.p_targets]
    s = Sample(draw_sample(dist, spec.n, spec.base_seed ^ r))
    out = {}
    for mspec in spec.methods:
        lab = mspec.label()
        try:
            cfg = mspec.resolve(s)
            path = k_path(s, cfg, k_range=k_grid, tail_at=anchors)
        except (ValueError, RuntimeError) as err:
            out[lab] = str(err)
            continue
        out[lab] = (path.xi, path.converged,
                    [path.tail_probs[c] for c in anchors])
    return out


def _worker_count(replications: int) -> int:
    import os

    raw = os.environ.get("TAILFORGE_THREADS", "1")
    try:
        workers = max(1, int(raw))
    except ValueError:
        workers = 1
    return min(workers, replications)


def run_experiment(spec: ExperimentSpec) -> CurveSet:
    """Run the Monte Carlo study and aggregate bias/RMSE per (method, k).

    Shape-estimate errors are xi-hat minus the true index; tail errors are
    log(p / p-hat) with p-hat = 0 capped at +/-50 (counted per cell).
    Non-converged fits are excluded and reported through n_ok.  The env
    var TAILFORGE_THREADS caps process parallelism over replications;
    aggregation is order-exact either way.
    """
    dist = spec.distribution
    xi_true = dist.xi
    k_grid = spec.k_grid if spec.k_grid is not None else default_k_grid(spec.n)
    labels = [m.label() for m in spec.methods]
    if len(set(labels)) != len(labels):
        raise ValueError("method labels must be unique within an experiment")

    workers = _worker_count(spec.replications)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rep_results = list(pool.map(partial(_replicate, spec), range(spec.replications)))
    else:
        rep_results = [_replicate(spec, r) for r in range(spec.replications)]

    # per (label, k index): lists of per-replication values
    xi_err: dict[str, list[list[float]]] = {lab: [[] for _ in k_grid] for lab in labels}
    logp: dict[tuple[str, float], list[list[float]]] = {
        (lab, p): [[] for _ in k_grid] for lab in labels for p in spec.p_targets}
    capped: dict[str, list[int]] = {lab: [0] * len(k_grid) for lab in labels}
    errors: dict[str, str] = {}
    successes: dict[str, int] = {lab: 0 for lab in labels}

    for rep in rep_results:
        for lab in labels:
            got = rep.get(lab)
            if isinstance(got, str):
                errors.setdefault(lab, got)
                continue
            xi, conv, tails = got
            successes[lab] += 1
            for i in range(len(k_grid)):
                if not (conv[i] and np.isfinite(xi[i])):
                    continue
                xi_err[lab][i].append(float(xi[i]) - xi_true)
                for j, p in enumerate(spec.p_targets):
                    phat = tails[j][i]
                    if not np.isfinite(phat) or phat <= 0:
                        logp[(lab, p)][i].append(LOG_CAP)
                        capped[lab][i] += 1
                        continue
                    val = math.log(p / phat)
                    if abs(val) > LOG_CAP:
                        val = math.copysign(LOG_CAP, val)
                        capped[lab][i] += 1
                    logp[(lab, p)][i].append(val)

    columns = ["method", "k", "bias_xi", "rmse_xi"]
    for p in spec.p_targets:
        columns += [f"bias_logp_{p:g}", f"rmse_logp_{p:g}"]
    columns += ["n_ok", "n_capped"]

    rows: list[list] = []
    w = spec.smoothing_window
    for lab in labels:
        bias_c = [_fsum_mean(v) for v in xi_err[lab]]
        rmse_c = [math.sqrt(_fsum_mean([e * e for e in v])) if v else math.nan
                  for v in xi_err[lab]]
        tail_cols = []
        for p in spec.p_targets:
            t_bias = [_fsum_mean(v) for v in logp[(lab, p)]]
            t_rmse = [math.sqrt(_fsum_mean([e * e for e in v])) if v else math.nan
                      for v in logp[(lab, p)]]
            tail_cols.append((_smooth(t_bias, w), _smooth(t_rmse, w)))
        bias_c, rmse_c = _smooth(bias_c, w), _smooth(rmse_c, w)
        for i, k in enumerate(k_grid):
            row = [lab, int(k), bias_c[i], rmse_c[i]]
            for t_bias, t_rmse in tail_cols:
                row += [t_bias[i], t_rmse[i]]
            row += [len(xi_err[lab][i]), capped[lab][i]]
            rows.append(row)
        if successes[lab] == 0 and lab not in errors:
            errors[lab] = "method produced no successful replications"

    return CurveSet(columns=columns, rows=rows, p_targets=spec.p_targets, errors=errors)


def _format_cell(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def export_curves(curves: CurveSet, fmt: str = "csv") -> bytes:
    """Serialize curves; CSV cells use 17-significant-digit decimals."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(curves.columns)
        for row in curves.rows:
            writer.writerow([_format_cell(v) for v in row])
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "columns": curves.columns,
            "p_targets": list(curves.p_targets),
            "rows": curves.rows,
            "errors": curves.errors,
        }
        return json.dumps(doc, allow_nan=True).encode()
    raise ValueError("format must be 'csv' or 'json'")


def import_curves(data: bytes, fmt: str = "csv") -> CurveSet:
    if fmt == "json":
        doc = json.loads(data.decode())
        rows = [[r[0], int(r[1])] + [float(v) for v in r[2:-2]] + [int(r[-2]), int(r[-1])]
                for r in doc["rows"]]
        return CurveSet(columns=list(doc["columns"]), rows=rows,
                        p_targets=tuple(doc["p_targets"]), errors=dict(doc.get("errors", {})))
    if fmt == "csv":
        text = data.decode()
        reader = csv.reader(io.StringIO(text))
        columns = next(reader)
        rows = []
        p_targets = tuple(float(c[len("bias_logp_"):]) for c in columns
                          if c.startswith("bias_logp_"))
        for rec in reader:
            rows.append([rec[0], int(rec[1])] + [float(v) for v in rec[2:-2]]
                        + [int(rec[-2]), int(rec[-1])])
        return CurveSet(columns=columns, rows=rows, p_targets=p_targets)
    raise ValueError("format must be 'csv' or 'json'")
