"""HTTP JSON API backing the threshold-explorer UI.

The dataset registry is append-only; GET handlers are read-only, so
concurrent requests are safe.  Simulation jobs run on a small worker pool
(one in-flight job by default) and are polled via /jobs/{id}.
"""

from __future__ import annotations

import itertools
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .cli import SCHEMA_VERSION, config_from_params, gof_payload, path_payload
from .datasets import Dataset, ingest_csv
from .distributions import DistributionSpec, sample as draw_sample
from .empirical import Sample
from .inference import tail_prob, tail_quantile
from .selection import METHODS, default_grid, k_path, min_variance_select, selection_k_range
from .simulate import ExperimentSpec, import_curves, export_curves, run_experiment

__all__ = ["create_app"]


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"schema_version": SCHEMA_VERSION, "error": message})


def _demo_dataset() -> Dataset:
    # synthetic heavy-tailed claims: Burr(1,2) scaled to an insurance-like range
    values = draw_sample(DistributionSpec.burr(1, 2), 500, seed=20260810) * 1e5
    lines = "claim\n" + "\n".join("%.2f" % v for v in values) + "\n"
    return ingest_csv(lines, dataset_id="demo-claims",
                      name="synthetic heavy-tailed claims").dataset


def create_app(max_jobs: int | None = None, with_demo: bool = False) -> FastAPI:
    app = FastAPI(title="tailforge", version="0.1.0")
    registry: dict[str, Dataset] = {}
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()
    job_ids = itertools.count(1)
    if max_jobs is None:
        try:
            max_jobs = max(1, int(os.environ.get("TAILFORGE_THREADS", "1")))
        except ValueError:
            max_jobs = 1
    executor = ThreadPoolExecutor(max_workers=max_jobs)

    if with_demo:
        demo = _demo_dataset()
        registry[demo.id] = demo

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return _error(400, str(exc.errors()))

    def get_dataset(dataset_id: str) -> Dataset | JSONResponse:
        ds = registry.get(dataset_id)
        if ds is None:
            return _error(404, f"unknown dataset {dataset_id!r}")
        return ds

    @app.post("/datasets", status_code=201)
    async def upload_dataset(request: Request, id: str | None = None, name: str | None = None,
                             column: str | None = None,
                             header: bool | None = None):
        body = await request.body()
        dataset_id = id or f"dataset-{len(registry) + 1}"
        if dataset_id in registry:
            return _error(409, f"dataset {dataset_id!r} already exists")
        col = int(column) if column is not None and column.isdigit() else column
        try:
            report = ingest_csv(body, dataset_id=dataset_id, name=name, column=col,
                                header=header)
        except ValueError as err:
            return _error(400, str(err))
        registry[dataset_id] = report.dataset
        return {"schema_version": SCHEMA_VERSION, **report.dataset.to_summary(),
                "rows": report.n_rows, "rejected": len(report.rejected)}

    @app.get("/datasets")
    def list_datasets():
        return {"schema_version": SCHEMA_VERSION,
                "datasets": [ds.to_summary() for ds in registry.values()]}

    @app.get("/datasets/{dataset_id}/path")
    def dataset_path(dataset_id: str, method: str = Query(...),
                     k_min: int | None = None, k_max: int | None = None,
                     rho: float | None = None, rho_tilde: float | None = None,
                     xi0: float | None = None, a: float | None = None,
                     kstar: int | None = None, m: int | None = None,
                     ci: float | None = None, c: float | None = None,
                     smooth: int = 1):
        ds = get_dataset(dataset_id)
        if isinstance(ds, JSONResponse):
            return ds
        if method not in METHODS:
            return _error(400, f"unknown method {method!r}")
        if smooth < 1 or smooth % 2 == 0:
            return _error(400, "smooth must be an odd positive window")
        try:
            cfg = config_from_params(method, dict(rho=rho, rho_tilde=rho_tilde, xi0=xi0,
                                                  a=a, kstar=kstar, m=m))
        except ValueError as err:
            return _error(400, str(err))
        n = ds.sample.n
        lo = k_min if k_min is not None else cfg.min_k
        hi = k_max if k_max is not None else n - 1
        try:
            return path_payload(ds, cfg, range(lo, hi + 1), ci=ci,
                                tail_at=None if c is None else [c], smooth=smooth)
        except (ValueError, RuntimeError) as err:
            return _error(422, str(err))

    @app.get("/datasets/{dataset_id}/tail")
    def dataset_tail(dataset_id: str, method: str = Query(...), k: int = Query(...),
                     c: float | None = None, p: float | None = None,
                     rho: float | None = None, rho_tilde: float | None = None,
                     xi0: float | None = None, a: float | None = None,
                     kstar: int | None = None, m: int | None = None):
        ds = get_dataset(dataset_id)
        if isinstance(ds, JSONResponse):
            return ds
        if (c is None) == (p is None):
            return _error(400, "pass exactly one of c= or p=")
        try:
            cfg = config_from_params(method, dict(rho=rho, rho_tilde=rho_tilde, xi0=xi0,
                                                  a=a, kstar=kstar, m=m))
            path = k_path(ds.sample, cfg, k_range=[k])
            fit = path.fits[0]
            if fit is None:
                return _error(422, f"method {method!r} infeasible at k={k}")
            est = tail_prob(fit, c, ds.sample.n) if c is not None else \
                tail_quantile(fit, p, ds.sample.n)
        except (ValueError, RuntimeError) as err:
            return _error(422, str(err))
        return {"schema_version": SCHEMA_VERSION, "dataset": dataset_id,
                "method": method, "k": k, "kind": est.kind, "value": est.value}

    @app.get("/datasets/{dataset_id}/gof")
    def dataset_gof(dataset_id: str, xi0: float = Query(...), sigma0: float = Query(...),
                    a: float = Query(0.99)):
        ds = get_dataset(dataset_id)
        if isinstance(ds, JSONResponse):
            return ds
        if sigma0 <= 0:
            return _error(400, "sigma0 must be > 0")
        try:
            return gof_payload(ds, xi0, sigma0, a)
        except (ValueError, RuntimeError) as err:
            return _error(422, str(err))

    @app.get("/datasets/{dataset_id}/minvar")
    def dataset_minvar(dataset_id: str, method: str = Query(...)):
        ds = get_dataset(dataset_id)
        if isinstance(ds, JSONResponse):
            return ds
        try:
            grid = default_grid(method, ds.sample.n)
            chosen = min_variance_select(ds.sample, grid,
                                         k_range=selection_k_range(ds.sample.n))
        except (ValueError, RuntimeError) as err:
            return _error(422, str(err))
        return {"schema_version": SCHEMA_VERSION, "dataset": dataset_id,
                "method": method, "selected": chosen.to_dict()}

    @app.post("/simulate", status_code=202)
    async def submit_simulation(request: Request):
        try:
            doc = await request.json()
            spec = ExperimentSpec.from_dict(doc)
        except (ValueError, KeyError, TypeError) as err:
            return _error(400, f"invalid experiment spec: {err}")
        job_id = f"job-{next(job_ids)}"
        with jobs_lock:
            jobs[job_id] = {"status": "pending"}

        def run():
            with jobs_lock:
                jobs[job_id]["status"] = "running"
            try:
                curves = run_experiment(spec)
                payload = import_curves(export_curves(curves, "json"), "json")
                with jobs_lock:
                    jobs[job_id] = {"status": "done", "result": {
                        "columns": payload.columns,
                        "rows": [[None if isinstance(v, float) and v != v else v
                                  for v in row] for row in payload.rows],
                        "errors": curves.errors}}
            except Exception as err:  # job errors surface through polling
                with jobs_lock:
                    jobs[job_id] = {"status": "error", "error": str(err)}

        executor.submit(run)
        return {"schema_version": SCHEMA_VERSION, "job_id": job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                return _error(404, f"unknown job {job_id!r}")
            return {"schema_version": SCHEMA_VERSION, "job_id": job_id, **job}

    ui_dir = os.environ.get("TAILFORGE_UI_DIR", "frontend/dist")
    if Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
