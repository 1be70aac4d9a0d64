"""Command-line entry points: fit, simulate, gof, serve."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .datasets import Dataset, ingest_csv
from .empirical import Sample
from .extended import ExtendedFit
from .inference import ci_xi, functionals, gof_pp
from .selection import METHODS, MethodConfig, k_path
from .simulate import ExperimentSpec, export_curves, run_experiment

SCHEMA_VERSION = 1

_HYPER_NAMES = ("rho", "rho_tilde", "xi0", "a", "kstar", "m")


def config_from_params(method: str, params: dict) -> MethodConfig:
    """Build a validated MethodConfig from loosely-typed request parameters."""
    kwargs = {}
    for name in _HYPER_NAMES:
        val = params.get(name)
        if val is None:
            continue
        kwargs[name] = int(val) if name in ("kstar", "m") else float(val)
    return MethodConfig(method, **kwargs)


def _clean(v):
    if v is None:
        return None
    v = float(v)
    return None if not np.isfinite(v) else v


def path_payload(dataset: Dataset, cfg: MethodConfig, ks, ci: float | None = None,
                 tail_at=None, smooth: int = 1) -> dict:
    """The JSON document for a k-path: shared verbatim by CLI and service."""
    path = k_path(dataset.sample, cfg, k_range=ks, tail_at=tail_at)
    if smooth > 1:
        from .empirical import moving_average

        fits = path.fits
        path = moving_average(path, smooth)
        path.fits = fits
    entries = []
    for i, k in enumerate(path.k):
        entry = {"k": int(k), "xi": _clean(path.xi[i]), "converged": bool(path.converged[i])}
        if np.isfinite(path.sigma[i]):
            entry["sigma"] = float(path.sigma[i])
        if np.isfinite(path.delta[i]):
            entry["delta"] = float(path.delta[i])
        for c, vals in path.tail_probs.items():
            entry.setdefault("tail", {})[("%g" % c)] = _clean(vals[i])
        if ci is not None and isinstance(path.fits[i], ExtendedFit) and path.converged[i]:
            fit = path.fits[i]
            try:
                moments = functionals(fit.bias, fit.xi)
                lo, hi = ci_xi(fit, moments, ci)
                entry["ci"] = [float(lo), float(hi)]
            except ValueError:
                pass
        entries.append(entry)
    return {"schema_version": SCHEMA_VERSION, "method": cfg.method,
            "label": cfg.label(), "dataset": dataset.id, "entries": entries}


def gof_payload(dataset: Dataset, xi0: float, sigma0: float, a: float) -> dict:
    n = dataset.sample.n
    m = max(1, round(n ** a))
    res = gof_pp(dataset.sample, xi0, sigma0, m)
    return {"schema_version": SCHEMA_VERSION, "dataset": dataset.id,
            "xi0": xi0, "sigma0": sigma0, "m": m,
            "points": [[float(x), float(y)] for x, y in res.points],
            "correlation": res.correlation}


def _load_dataset(args) -> Dataset:
    with open(args.data, "rb") as fh:
        raw = fh.read()
    column = args.column
    if column is not None and column.isdigit():
        column = int(column)
    report = ingest_csv(raw, dataset_id=args.data, column=column,
                        header=False if args.no_header else None)
    if report.rejected and not args.quiet:
        print(f"rejected {len(report.rejected)} rows", file=sys.stderr)
    return report.dataset


def _emit(payload, args):
    if isinstance(payload, bytes):
        data = payload
    else:
        data = json.dumps(payload, indent=2).encode()
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode() + ("" if data.endswith(b"\n") else "\n"))


def cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    cfg = config_from_params(args.method, vars(args))
    n = dataset.sample.n
    if args.k is not None:
        ks = [args.k]
    else:
        lo = args.k_min if args.k_min is not None else cfg.min_k
        hi = args.k_max if args.k_max is not None else n - 1
        ks = range(lo, hi + 1)
    _emit(path_payload(dataset, cfg, ks, ci=args.ci), args)
    return 0


def cmd_simulate(args) -> int:
    with open(args.spec) as fh:
        doc = json.load(fh)
    spec = ExperimentSpec.from_dict(doc)
    if args.seed is not None:
        spec = ExperimentSpec.from_dict({**doc, "base_seed": args.seed})
    curves = run_experiment(spec)
    _emit(export_curves(curves, args.format), args)
    for label, msg in curves.errors.items():
        print(f"warning: {label}: {msg}", file=sys.stderr)
    return 0


def cmd_gof(args) -> int:
    dataset = _load_dataset(args)
    if args.sigma0 <= 0:
        print("error: --sigma0 must be > 0", file=sys.stderr)
        return 2
    _emit(gof_payload(dataset, args.xi0, args.sigma0, args.a), args)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(with_demo=args.demo)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailforge",
                                     description="bias-reduced peaks-over-threshold tail estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a method over a k range on CSV data")
    fit.add_argument("data", help="CSV file with one observation per row")
    fit.add_argument("--method", required=True, choices=METHODS)
    fit.add_argument("--k", type=int)
    fit.add_argument("--k-min", type=int, dest="k_min")
    fit.add_argument("--k-max", type=int, dest="k_max")
    fit.add_argument("--rho", type=float)
    fit.add_argument("--rho-tilde", type=float, dest="rho_tilde")
    fit.add_argument("--xi0", type=float)
    fit.add_argument("--a", type=float)
    fit.add_argument("--kstar", type=int)
    fit.add_argument("--m", type=int)
    fit.add_argument("--ci", type=float, help="confidence level for extended-fit intervals")
    fit.add_argument("--column", help="CSV column name or index")
    fit.add_argument("--no-header", action="store_true")
    fit.add_argument("--quiet", action="store_true")
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment from a JSON spec")
    sim.add_argument("spec", help="experiment spec JSON file")
    sim.add_argument("--seed", type=int, help="override the base seed")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--out")
    sim.set_defaults(func=cmd_simulate)

    gof = sub.add_parser("gof", help="transformed P-P goodness-of-fit plot data")
    gof.add_argument("data")
    gof.add_argument("--xi0", type=float, required=True)
    gof.add_argument("--sigma0", type=float, required=True)
    gof.add_argument("--a", type=float, default=0.99)
    gof.add_argument("--column")
    gof.add_argument("--no-header", action="store_true")
    gof.add_argument("--quiet", action="store_true")
    gof.add_argument("--out")
    gof.set_defaults(func=cmd_gof)

    serve = sub.add_parser("serve", help="run the HTTP JSON API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8711)
    serve.add_argument("--demo", action="store_true",
                       help="register a bundled synthetic heavy-tailed demo dataset")
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
