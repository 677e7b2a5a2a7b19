"""Uncertainty quantification over the parametric surrogate."""

from mcpinns.uq.abc import (
    BANDWIDTH_FLOOR,
    DEFAULT_SENSORS,
    AbcConfig,
    ParametricModel,
    PosteriorSample,
    abc_rejection,
    discrepancy,
    kde_1d,
    kde_grid,
    observed_values,
    scott_bandwidth,
    stand_in_model,
    surrogate_model,
)

__all__ = [
    "BANDWIDTH_FLOOR",
    "DEFAULT_SENSORS",
    "AbcConfig",
    "ParametricModel",
    "PosteriorSample",
    "abc_rejection",
    "discrepancy",
    "kde_1d",
    "kde_grid",
    "observed_values",
    "scott_bandwidth",
    "stand_in_model",
    "surrogate_model",
]
