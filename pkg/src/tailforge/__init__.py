"""Bias-reduced peaks-over-threshold tail estimation.

Classical Pareto/GPD maximum likelihood plus extended (parametric and
Bernstein-nonparametric bias) and transformed semiparametric POT models,
with tail probability and quantile estimation, asymptotic confidence
intervals, minimum-variance hyperparameter selection, goodness-of-fit
diagnostics, and a Monte Carlo benchmarking harness.
"""

from .bernstein import BernsteinCdf, fit_bernstein, identity_cdf
from .datasets import Dataset, IngestReport, ingest_csv
from .distributions import DistributionSpec, quantile, sample, survival, tail_anchor
from .empirical import ExceedanceSet, KPath, Sample, empirical_cdf, exceedances, hill, moving_average
from .extended import (BernsteinBias, BiasFunction, ClampStats, ExtendedFit,
                       GpdSecondOrderBias, ParetoPowerBias, extended_survival,
                       fit_extended_gpd, fit_extended_pareto, profile_delta)
from .gpd import GpdFit, GpdParams, fit_gpd_ml, gpd_loglik, gpd_loglik_grad, gpd_survival
from .inference import (BiasMoments, GofResult, HillFit, TailEstimate, ci_xi,
                        cov_xi_tau_e, functionals, gof_pp, tail_prob, tail_quantile,
                        var_xi_e, var_xi_eplus)
from .selection import (METHODS, MethodConfig, default_grid, k_path,
                        min_variance_select, selection_k_range)
from .simulate import (CurveSet, ExperimentSpec, SimMethod, export_curves,
                       import_curves, run_experiment)
from .transform import TransformFit, fit_transform, transform_loglik, transform_loglik_grad

__version__ = "0.1.0"
