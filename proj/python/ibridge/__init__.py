"""Integrative bridge selection for multi-subtype survival studies."""

from ._core import (
    ConfigError,
    DataError,
    Dataset,
    __version__,
    fit,
    km_weights,
    lambda_to_tau,
    logrank,
    predict,
    presets,
    reproduce,
    simulate,
    stability,
    tau_to_lambda,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "__version__",
    "fit",
    "km_weights",
    "lambda_to_tau",
    "logrank",
    "predict",
    "presets",
    "reproduce",
    "simulate",
    "stability",
    "tau_to_lambda",
]
