"""
mcpinns: Monte Carlo physics-informed neural networks for fractional PDEs.

Stochastic estimators of the integral fractional Laplacian and the Caputo
derivative, applied to a boundary-enforcing neural surrogate and trained with
an unbiased residual loss; plus inverse identification, a parametric surrogate
and rejection ABC over its random inputs.
"""

__version__ = "0.1.0"

from mcpinns.config import ConfigError, RunConfig, load_config, load_run_config
from mcpinns.errors import (
    AccuracyError,
    ContractViolation,
    DomainError,
    McPinnsError,
    TrainingError,
)
from mcpinns.operators import EstimatorConfig, mc_caputo, mc_frac_laplacian, residual_estimate
from mcpinns.problems import make_problem
from mcpinns.training import TrainConfig, train

__all__ = [
    "__version__",
    "AccuracyError",
    "ConfigError",
    "ContractViolation",
    "DomainError",
    "EstimatorConfig",
    "McPinnsError",
    "RunConfig",
    "TrainConfig",
    "TrainingError",
    "load_config",
    "load_run_config",
    "make_problem",
    "mc_caputo",
    "mc_frac_laplacian",
    "residual_estimate",
    "train",
]
