"""Joint hierarchical Gaussian process models for a continuous marker and
recurrent binary events observed on a shared discrete time grid."""

from ._jhgp import (
    DataError,
    DomainError,
    Draws,
    NumericalError,
    Subject,
    UsageError,
    ar_forecast_check,
    episode_loglik,
    fit,
    fitted_hazard,
    forecast,
    kernel_derivative,
    kernel_matrix,
    logistic_baseline,
    pg_mean,
    pg_sample,
    pg_variance,
    read_csv,
    roc,
    score,
    simulate,
)

__all__ = [
    "DataError",
    "DomainError",
    "Draws",
    "NumericalError",
    "Subject",
    "UsageError",
    "ar_forecast_check",
    "episode_loglik",
    "fit",
    "fitted_hazard",
    "forecast",
    "kernel_derivative",
    "kernel_matrix",
    "logistic_baseline",
    "pg_mean",
    "pg_sample",
    "pg_variance",
    "read_csv",
    "roc",
    "score",
    "simulate",
]
