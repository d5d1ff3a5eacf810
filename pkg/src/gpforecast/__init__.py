"""Automatic probabilistic time-series forecasting with a fixed-composition GP.

A single additive kernel (periodic + linear + RBF + two spectral-mixture
terms + noise) covers most univariate series; lognormal priors keep the
hyperparameters plausible, so one MAP optimization run from the prior
medians is enough.  Forecasts come with calibrated per-step variances and
can be scored with MAE, CRPS, and average log-likelihood.
"""

from .bench import (
    BenchReport,
    CsvFormatError,
    CsvLayout,
    Dataset,
    SeriesEntry,
    SeriesFailure,
    SeriesScore,
    emit_report,
    load_csv,
    parse_machine_report,
    run_benchmark,
    seasonal_naive,
    write_csv,
)
from .forecasting import (
    MONTHLY,
    QUARTERLY,
    SIX_HOURLY,
    ConstantSeriesError,
    Forecast,
    Standardizer,
    TimeSeries,
    default_horizon,
    default_spec,
    forecast,
    future_time_index,
    make_time_index,
    parse_frequency,
    standardized_posterior,
)
from .gp import (
    FitState,
    IllConditionedModelError,
    PredictiveDistribution,
    fit,
    grad_log_marginal_likelihood,
    log_marginal_likelihood,
    log_marginal_likelihood_and_grad,
    predict,
)
from .kernels import (
    HyperParams,
    InvalidHyperparameterError,
    KernelSpec,
    Term,
    build_cross,
    build_gram,
    eval_kernel,
    grad_gram,
    zero_lag_variance,
)
from .metrics import ScoreReport, crps_gaussian, log_likelihood, mae, score
from .priors import (
    LogNormalPrior,
    PriorSpec,
    default_priors,
    grad_log_prior,
    load_priors,
    log_prior,
    median_hyperparams,
    save_priors,
)
from .training import TrainConfig, TrainResult, map_objective, map_objective_grad, train

__version__ = "0.1.0"
