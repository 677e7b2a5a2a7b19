"""Losses, optimizer and the training loop."""

from mcpinns.training.loss import (
    LOSS_MODES,
    LossTerms,
    LossWeights,
    data_loss,
    draw_group_pair,
    equation_loss,
    init_loss,
    misfit_loss,
    residual_products,
    total_loss,
)
from mcpinns.training.metrics import (
    DEFAULT_TEST_POINTS,
    GRID_POINTS,
    relative_l2,
    solution_grid,
    surrogate_relative_l2,
)
from mcpinns.training.optim import PDE_BOUNDS, AdamConfig, TrainState, adam_step, clamp_pde
from mcpinns.training.trainer import (
    StepResult,
    TrainConfig,
    Trainer,
    TrainReport,
    initial_state,
    train,
)

__all__ = [
    "DEFAULT_TEST_POINTS",
    "GRID_POINTS",
    "LOSS_MODES",
    "PDE_BOUNDS",
    "AdamConfig",
    "LossTerms",
    "LossWeights",
    "StepResult",
    "TrainConfig",
    "TrainReport",
    "TrainState",
    "Trainer",
    "adam_step",
    "clamp_pde",
    "data_loss",
    "draw_group_pair",
    "equation_loss",
    "init_loss",
    "initial_state",
    "misfit_loss",
    "relative_l2",
    "residual_products",
    "solution_grid",
    "surrogate_relative_l2",
    "total_loss",
    "train",
]
