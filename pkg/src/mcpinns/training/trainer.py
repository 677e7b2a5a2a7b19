"""The training loop.

Each epoch draws fresh residual points, splits them into fixed-size chunks and
evaluates the equation loss and its gradient chunk by chunk, possibly on a
thread pool. Chunk results are summed in chunk order, so the worker count
changes wall time only.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from mcpinns.autodiff import tape
from mcpinns.autodiff.network import ParamVector, TracedParams, grad_wrt_params, init_params, record
from mcpinns.core.rng import RngKey, Stream
from mcpinns.errors import DomainError, TrainingError
from mcpinns.instrumentation import EvalCounter
from mcpinns.operators.estimators import EstimatorConfig
from mcpinns.problems.base import Dataset, Problem, ResidualBatch
from mcpinns.training.loss import (
    BATCH_STREAM,
    LOSS_MODES,
    LossWeights,
    data_loss,
    draw_group_pair,
    init_loss,
    residual_products,
)
from mcpinns.training.metrics import DEFAULT_TEST_POINTS, surrogate_relative_l2
from mcpinns.training.optim import AdamConfig, TrainState, adam_step

logger = logging.getLogger("mcpinns.training")


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one training run."""

    epochs: int = 10_000
    batch_size: int = 128
    adam: AdamConfig = field(default_factory=AdamConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    mode: str = "paired"
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    workers: int = 1
    chunk_size: int = 32
    trace_every: int = 100
    log_every: int = 100
    n_test: int = DEFAULT_TEST_POINTS

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise DomainError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.mode not in LOSS_MODES:
            raise DomainError(f"unknown loss mode {self.mode!r}; choose from {LOSS_MODES}")
        if self.workers < 1 or self.chunk_size < 1:
            raise DomainError("workers and chunk_size must be >= 1")
        if self.trace_every < 1 or self.log_every < 1:
            raise DomainError("trace_every and log_every must be >= 1")


@dataclass
class StepResult:
    """Loss components and gradient of one epoch."""

    total: float
    equ: float
    g: float
    u: float
    grad: np.ndarray
    equation_counter: EvalCounter
    data_counter: EvalCounter


@dataclass
class TrainReport:
    epochs: int
    final_loss: dict[str, float] | None
    relative_l2: float | None
    pde_values: dict[str, Any]
    true_values: dict[str, Any] | None
    evals_per_point: float | None
    counter: EvalCounter

    def to_dict(self) -> dict[str, Any]:
        return {
            "epochs": self.epochs,
            "final_loss": self.final_loss,
            "relative_l2": self.relative_l2,
            "pde_values": self.pde_values,
            "true_values": self.true_values,
            "evals_per_point": self.evals_per_point,
            "evaluations": self.counter.to_dict(),
        }


def initial_state(problem: Problem, cfg: TrainConfig) -> TrainState:
    """Glorot-initialised network plus the problem's initial PDE values."""
    root = RngKey(cfg.seed)
    params = init_params(problem.network, root.child(Stream.INIT), problem.pde_sizes())
    for name, value in problem.initial_pde_values(root).items():
        params = params.with_block(name, value)
    return TrainState.initial(params, root)


def _chunk_bounds(n: int, size: int) -> list[tuple[int, int]]:
    return [(start, min(start + size, n)) for start in range(0, n, size)]


class Trainer:
    """Runs epochs of a problem against a TrainConfig.

    Holds the thread pool (when ``workers > 1``) and the fixed data sets.
    """

    def __init__(self, problem: Problem, cfg: TrainConfig, dataset: Dataset | None = None):
        self.problem = problem
        self.cfg = cfg
        self.root = RngKey(cfg.seed)
        self.dataset = dataset if dataset is not None else problem.dataset(self.root.child(Stream.DATA))
        self.counter = EvalCounter()
        self._pool: ThreadPoolExecutor | None = None

    def __enter__(self) -> "Trainer":
        if self.cfg.workers > 1:
            self._pool = ThreadPoolExecutor(max_workers=self.cfg.workers, thread_name_prefix="mcpinns")
        return self

    def __exit__(self, *exc: object) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    # -- one epoch ----------------------------------------------------------

    def _chunk_job(
        self, params: ParamVector, batch: ResidualBatch, epoch_key: RngKey, bounds: tuple[int, int]
    ) -> tuple[float, np.ndarray, EvalCounter]:
        start, stop = bounds
        chunk = batch.take(slice(start, stop))
        ids = np.arange(start, stop)
        groups = draw_group_pair(epoch_key, ids, self.cfg.estimator.m, self.problem.d)
        counter = EvalCounter()

        def build(traced: TracedParams) -> Any:
            surrogate = self.problem.make_surrogate(traced, counter)
            products = residual_products(
                surrogate, self.problem, traced, chunk, groups, self.cfg.estimator, self.cfg.mode
            )
            return tape.sum(products)

        rec = record(params, build)
        return rec.value, grad_wrt_params(rec), counter

    def _data_job(self, params: ParamVector) -> tuple[float, float, float, np.ndarray, EvalCounter]:
        counter = EvalCounter()
        parts: dict[str, float] = {}
        weights = self.cfg.weights

        def build(traced: TracedParams) -> Any:
            surrogate = self.problem.make_surrogate(traced, counter)
            g = init_loss(surrogate, self.dataset.d_g) if weights.w_g > 0.0 else 0.0
            u = data_loss(surrogate, self.dataset.d_u) if weights.w_u > 0.0 else 0.0
            parts["g"] = float(tape.value_of(g))
            parts["u"] = float(tape.value_of(u))
            return tape.add(tape.mul(weights.w_g, g), tape.mul(weights.w_u, u))

        rec = record(params, build)
        return rec.value, parts["g"], parts["u"], grad_wrt_params(rec), counter

    def loss_and_grad(self, params: ParamVector, epoch: int) -> StepResult:
        """Weighted total loss and its exact gradient for one epoch's draws."""
        epoch_key = self.root.child(Stream.EPOCH, epoch)
        equation_counter = EvalCounter()
        grad = np.zeros(len(params))
        equ = 0.0
        if self.cfg.weights.w_equ > 0.0:
            batch = self.problem.sample_batch(self.cfg.batch_size, epoch_key.child(BATCH_STREAM))
            bounds = _chunk_bounds(len(batch), self.cfg.chunk_size)
            job = lambda b: self._chunk_job(params, batch, epoch_key, b)  # noqa: E731
            results = list(self._pool.map(job, bounds)) if self._pool else [job(b) for b in bounds]
            total_sum = 0.0
            eq_grad = np.zeros(len(params))
            for value, chunk_grad, counter in results:
                total_sum += value
                eq_grad += chunk_grad
                equation_counter.merge(counter)
            scale = self.cfg.weights.w_equ / len(batch)
            equ = total_sum / len(batch)
            grad += scale * eq_grad

        data_value, g, u, data_grad, data_counter = self._data_job(params)
        grad += data_grad
        total = self.cfg.weights.w_equ * equ + data_value
        return StepResult(
            total=total,
            equ=equ,
            g=g,
            u=u,
            grad=grad,
            equation_counter=equation_counter,
            data_counter=data_counter,
        )

    # -- loop ---------------------------------------------------------------

    def _trace_row(self, state: TrainState, step: StepResult, lr: float) -> dict[str, Any]:
        row: dict[str, Any] = {
            "epoch": state.epoch,
            "total": step.total,
            "equ": step.equ,
            "g": step.g,
            "u": step.u,
            "lr": lr,
        }
        row.update(state.pde_values())
        return row

    def run(
        self,
        state: TrainState | None = None,
        on_epoch: Callable[[TrainState, StepResult], None] | None = None,
    ) -> tuple[TrainState, TrainReport]:
        cfg = self.cfg
        state = state if state is not None else initial_state(self.problem, cfg)
        last_step: StepResult | None = None
        inverse = bool(state.params.trainable_pde)

        while state.epoch < cfg.epochs:
            epoch = state.epoch
            lr = cfg.adam.lr_at(epoch, cfg.epochs)
            step = self.loss_and_grad(state.params, epoch)
            self.counter.merge(step.equation_counter)
            self.counter.merge(step.data_counter)
            if not math.isfinite(step.total):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}",
                    diagnostics={"epoch": epoch, "equ": step.equ, "g": step.g, "u": step.u},
                    last_good=state.snapshot(),
                )
            if epoch % cfg.trace_every == 0 or epoch == cfg.epochs - 1:
                state.loss_trace.append(self._trace_row(state, step, lr))
            if epoch % cfg.log_every == 0:
                logger.info(
                    "epoch %d loss=%.6e equ=%.3e g=%.3e u=%.3e lr=%.1e %s",
                    epoch, step.total, step.equ, step.g, step.u, lr, state.pde_values() or "",
                )
            state = adam_step(state, step.grad, lr, cfg.adam)
            state.epoch = epoch + 1
            if inverse:
                state.pde_trace.append({"epoch": state.epoch, **state.pde_values()})
            last_step = step
            if on_epoch is not None:
                on_epoch(state, step)

        return state, self.report(state, last_step)

    def report(self, state: TrainState, last_step: StepResult | None) -> TrainReport:
        evals = None
        if last_step is not None and last_step.equation_counter.points:
            evals = last_step.equation_counter.points / self.cfg.batch_size
        true_values = getattr(self.problem, "true_values", None)
        return TrainReport(
            epochs=state.epoch,
            final_loss=None
            if last_step is None
            else {"total": last_step.total, "equ": last_step.equ, "g": last_step.g, "u": last_step.u},
            relative_l2=surrogate_relative_l2(self.problem, state.params, self.root, self.cfg.n_test),
            pde_values=state.pde_values(),
            true_values=true_values,
            evals_per_point=evals,
            counter=self.counter,
        )


def train(
    problem: Problem,
    cfg: TrainConfig,
    state: TrainState | None = None,
    on_epoch: Callable[[TrainState, StepResult], None] | None = None,
) -> tuple[TrainState, TrainReport]:
    """Run the training loop; ``epochs = 0`` returns the initial state and a report."""
    with Trainer(problem, cfg) as trainer:
        return trainer.run(state, on_epoch)
