"""Covariate-indexed bivariate extreme-value dependence estimation.

Moment-constrained kernel estimates of conditional angular densities,
with derived dependence functionals (Pickands function, extremal
coefficient, bivariate extreme-value cdf), cross-validated smoothing,
smoothed-bootstrap uncertainty bands, simulation oracles, an integrated
absolute error study harness, a financial-returns preprocessing
pipeline, and empirical tail-dependence diagnostics.
"""

__version__ = "0.1.0"

from .bootstrap import (
    BootstrapEnsemble,
    CentralRegion,
    bootstrap_surfaces,
    central_region,
    central_region_frame,
    modified_band_depth,
    smoothed_resample,
)
from .diagnostics import TailSummary, chi_chibar, rolling_chi
from .errors import (
    DegenerateDensityError,
    DomainError,
    EmptySampleError,
    EvdepError,
    ExtrapolationError,
    FeasibilityError,
    FitError,
    NegativeDensityWarning,
    NumericError,
)
from .estimator import (
    AngleSample,
    AngularSurface,
    TuningParams,
    angular_cdf,
    angular_density,
    default_angle_grid,
    grid_frame,
    ll_weights,
    moment_correction,
    nw_weights,
    surface_grid,
)
from .evaluation import GridSpec, MiaeReport, iae, miae_study
from .functionals import (
    FunctionalEstimate,
    bev_cdf,
    extremal_coefficient,
    extremal_coefficient_curve,
    pickands,
    trajectory_frame,
)
from .models import (
    ConditionalModel,
    Link,
    LogisticForms,
    covariate_grid_sampler,
    dirichlet_density,
    logistic_closed_forms,
    logistic_density,
    model_density,
    sample_angles,
    sample_bivariate_logistic,
    standard_models,
)
from .preprocess import (
    GarchFit,
    PseudoPolar,
    ReturnSeries,
    ThresholdCurve,
    drop_zero_pairs,
    empirical_frechet,
    engle_arch_lm,
    exceedance_angles,
    garch11_fit,
    neg_log_returns,
    pseudo_polar,
    quantile_spline_threshold,
)
from .special import (
    BetaParams,
    beta_density,
    gaussian_kernel,
    log_beta_density,
    log_gaussian_kernel,
    reg_inc_beta,
)
from .tuning import (
    CvConfig,
    TuningResult,
    covariate_blocks,
    feasible,
    lscv_objective,
    mlcv_objective,
    select_tuning,
    select_tuning_escalating,
)

__all__ = [
    "__version__",
    "AngleSample",
    "AngularSurface",
    "BetaParams",
    "BootstrapEnsemble",
    "CentralRegion",
    "ConditionalModel",
    "CvConfig",
    "DegenerateDensityError",
    "DomainError",
    "EmptySampleError",
    "EvdepError",
    "ExtrapolationError",
    "FeasibilityError",
    "FitError",
    "FunctionalEstimate",
    "GarchFit",
    "GridSpec",
    "Link",
    "LogisticForms",
    "MiaeReport",
    "NegativeDensityWarning",
    "NumericError",
    "PseudoPolar",
    "ReturnSeries",
    "TailSummary",
    "ThresholdCurve",
    "TuningParams",
    "TuningResult",
    "angular_cdf",
    "angular_density",
    "bev_cdf",
    "beta_density",
    "bootstrap_surfaces",
    "central_region",
    "central_region_frame",
    "chi_chibar",
    "covariate_blocks",
    "covariate_grid_sampler",
    "default_angle_grid",
    "dirichlet_density",
    "drop_zero_pairs",
    "empirical_frechet",
    "engle_arch_lm",
    "exceedance_angles",
    "extremal_coefficient",
    "extremal_coefficient_curve",
    "feasible",
    "garch11_fit",
    "gaussian_kernel",
    "grid_frame",
    "iae",
    "ll_weights",
    "log_beta_density",
    "log_gaussian_kernel",
    "logistic_closed_forms",
    "logistic_density",
    "lscv_objective",
    "miae_study",
    "mlcv_objective",
    "model_density",
    "modified_band_depth",
    "moment_correction",
    "neg_log_returns",
    "nw_weights",
    "pickands",
    "pseudo_polar",
    "quantile_spline_threshold",
    "rolling_chi",
    "sample_angles",
    "sample_bivariate_logistic",
    "select_tuning",
    "select_tuning_escalating",
    "smoothed_resample",
    "standard_models",
    "surface_grid",
    "trajectory_frame",
]
