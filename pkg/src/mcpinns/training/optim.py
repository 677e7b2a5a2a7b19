"""Adam with bias correction, step learning-rate decay and PDE-parameter clamping."""

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from mcpinns.autodiff.network import ParamVector
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation, DomainError, TrainingError

# Feasible boxes for trainable fractional orders.
PDE_BOUNDS: dict[str, tuple[float, float]] = {
    "alpha": (0.05, 1.95),
    "gamma": (0.05, 0.95),
}


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    decay_at: tuple[float, ...] = (0.5, 0.75)
    decay_factor: float = 0.1

    def __post_init__(self) -> None:
        if self.lr <= 0.0:
            raise DomainError(f"learning rate must be positive, got {self.lr}")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise DomainError(f"Adam betas must lie in [0, 1), got {(self.beta1, self.beta2)}")

    def lr_at(self, epoch: int, epochs: int) -> float:
        """Step schedule: multiply by ``decay_factor`` at each milestone fraction."""
        lr = self.lr
        for frac in self.decay_at:
            if epoch >= int(frac * epochs):
                lr *= self.decay_factor
        return lr


@dataclass
class TrainState:
    """Everything the training loop owns between epochs."""

    params: ParamVector
    m1: np.ndarray
    m2: np.ndarray
    key: RngKey
    epoch: int = 0
    step: int = 0
    loss_trace: list[dict[str, Any]] = field(default_factory=list)
    pde_trace: list[dict[str, Any]] = field(default_factory=list)

    @classmethod
    def initial(cls, params: ParamVector, key: RngKey) -> "TrainState":
        return cls(params=params, m1=np.zeros(len(params)), m2=np.zeros(len(params)), key=key)

    def snapshot(self) -> "TrainState":
        """A copy whose arrays and traces are not shared with this state."""
        return replace(
            self,
            m1=self.m1.copy(),
            m2=self.m2.copy(),
            loss_trace=list(self.loss_trace),
            pde_trace=list(self.pde_trace),
        )

    def pde_values(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name in self.params.trainable_pde:
            value = self.params.get(name)
            out[name] = float(value) if value.ndim == 0 else [float(v) for v in value]
        return out


def clamp_pde(params: ParamVector) -> ParamVector:
    for name, (low, high) in PDE_BOUNDS.items():
        if params.has(name):
            value = params.get(name)
            clipped = np.clip(value, low, high)
            if not np.array_equal(clipped, value):
                params = params.with_block(name, clipped)
    return params


def adam_step(
    state: TrainState, grads: np.ndarray, lr: float, cfg: AdamConfig | None = None
) -> TrainState:
    """One bias-corrected Adam update followed by PDE-parameter clamping."""
    cfg = cfg or AdamConfig()
    grads = np.asarray(grads, dtype=np.float64)
    if grads.shape != state.m1.shape:
        raise ContractViolation(
            f"gradient has shape {grads.shape}, parameters have {state.m1.shape}"
        )
    if not np.all(np.isfinite(grads)):
        bad = np.flatnonzero(~np.isfinite(grads))
        raise TrainingError(
            "non-finite gradient",
            diagnostics={"epoch": state.epoch, "bad_indices": bad[:20].tolist(), "n_bad": int(bad.size)},
            last_good=state,
        )
    step = state.step + 1
    m1 = cfg.beta1 * state.m1 + (1.0 - cfg.beta1) * grads
    m2 = cfg.beta2 * state.m2 + (1.0 - cfg.beta2) * grads * grads
    m1_hat = m1 / (1.0 - cfg.beta1**step)
    m2_hat = m2 / (1.0 - cfg.beta2**step)
    values = state.params.values - lr * m1_hat / (np.sqrt(m2_hat) + cfg.eps)
    params = clamp_pde(state.params.with_values(values))
    return replace(state, params=params, m1=m1, m2=m2, step=step)
