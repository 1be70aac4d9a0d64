"""Shared fixtures: the heavyweight Monte Carlo runs used by several modules."""

import math
import time

import numpy as np
import pytest

from tailforge import DistributionSpec, ExperimentSpec, SimMethod, run_experiment

MC_REPS = 500
MC_SEED = 20260810

# wall-clock per study, for the acceptance runtime budget
MC_TIMINGS: dict[str, float] = {}


def _timed(name: str, spec: ExperimentSpec):
    t0 = time.perf_counter()
    curves = run_experiment(spec)
    MC_TIMINGS[name] = time.perf_counter() - t0
    return curves


def cell(curves, method, k, column):
    rows = [r for r in curves.rows if r[0] == method and r[1] == k]
    assert len(rows) == 1, f"no unique cell for {method} at k={k}"
    return rows[0][curves.columns.index(column)]


def bias_se(curves, method, k, prefix="xi"):
    """Monte Carlo standard error of the bias cell from its (bias, rmse, n)."""
    b = cell(curves, method, k, f"bias_{prefix}")
    r = cell(curves, method, k, f"rmse_{prefix}")
    n = cell(curves, method, k, "n_ok")
    var = max(r * r - b * b, 0.0)
    return math.sqrt(var / n)


def abs_bias_gap_ok(curves, better, worse, k, prefix="xi", margin=3.0, noninferior=False):
    """|bias(better)| vs |bias(worse)| with a Monte Carlo margin of error.

    Superiority: |bias(better)| + margin*se < |bias(worse)|.
    Non-inferiority: |bias(better)| <= |bias(worse)| + margin*se.
    """
    bb = abs(cell(curves, better, k, f"bias_{prefix}"))
    bw = abs(cell(curves, worse, k, f"bias_{prefix}"))
    se = math.hypot(bias_se(curves, better, k, prefix), bias_se(curves, worse, k, prefix))
    if noninferior:
        return bb <= bw + margin * se
    return bb + margin * se < bw


@pytest.fixture(scope="session")
def burr_pareto_curves():
    """Burr(1,2) Pareto-track study: Hill versus extended-Pareto, 500 reps."""
    spec = ExperimentSpec(
        distribution=DistributionSpec.burr(1, 2),
        n=200,
        replications=MC_REPS,
        methods=(SimMethod("pareto-ml"), SimMethod("ep+", {"rho": -0.5})),
        p_targets=(0.003,),
        base_seed=MC_SEED,
        k_grid=(100, 150, 190),
    )
    return _timed("burr_pareto", spec)


@pytest.fixture(scope="session")
def burr_gpd_curves():
    """Burr(1,2) GPD-track study: GPD-ML versus extended GPD with the
    second-order rate selected per sample by minimum variance."""
    spec = ExperimentSpec(
        distribution=DistributionSpec.burr(1, 2),
        n=200,
        replications=MC_REPS,
        methods=(SimMethod("gpd-ml"),
                 SimMethod("ep", select={"rho_tilde": (-0.25, -0.5, -1.0, -2.0)})),
        p_targets=(0.003,),
        base_seed=MC_SEED,
        k_grid=(100, 150, 190),
    )
    return _timed("burr_gpd", spec)


@pytest.fixture(scope="session")
def frechet_curves():
    """Frechet(2) study with the second-order rate fixed at -2 on both tracks."""
    spec = ExperimentSpec(
        distribution=DistributionSpec.frechet(2),
        n=200,
        replications=MC_REPS,
        methods=(SimMethod("pareto-ml"), SimMethod("ep+", {"rho": -2.0}),
                 SimMethod("gpd-ml"), SimMethod("ep", {"rho_tilde": -2.0})),
        p_targets=(0.003,),
        base_seed=MC_SEED,
        k_grid=(100, 150, 190),
    )
    return _timed("frechet", spec)


def _negxi_spec(dist):
    return ExperimentSpec(
        distribution=dist,
        n=200,
        replications=MC_REPS,
        methods=(SimMethod("gpd-ml"), SimMethod("ep", {"rho_tilde": -1.0})),
        p_targets=(0.005,),
        base_seed=MC_SEED,
        k_grid=(150,),
    )


@pytest.fixture(scope="session")
def reversed_burr_curves():
    return _timed("reversed_burr", _negxi_spec(DistributionSpec.reversed_burr(5, 1)))


@pytest.fixture(scope="session")
def ev_weibull_curves():
    return _timed("ev_weibull", _negxi_spec(DistributionSpec.ev_weibull(4)))
