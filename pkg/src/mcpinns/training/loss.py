"""Loss terms: the paired equation loss, data misfits and their weighted total.

The equation loss multiplies two residual estimates built from independent
sample groups, so its expectation is the squared true residual. Single draws
can be negative and are never clipped.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from mcpinns.autodiff import tape
from mcpinns.autodiff.network import ParamSource
from mcpinns.autodiff.tape import Tensor
from mcpinns.core.rng import RngKey
from mcpinns.errors import ContractViolation, DomainError
from mcpinns.instrumentation import EvalCounter
from mcpinns.operators.estimators import (
    EstimatorConfig,
    SampleGroup,
    draw_sample_group,
    residual_estimate,
)
from mcpinns.problems.ansatz import Surrogate
from mcpinns.problems.base import Dataset, ObservationSet, Problem, ResidualBatch

LOSS_MODES = ("paired", "group-mean")

# Path entries under an epoch key.
BATCH_STREAM = 0
GROUP_STREAM = 1


@dataclass(frozen=True)
class LossWeights:
    w_equ: float = 1.0
    w_g: float = 1.0
    w_u: float = 1.0

    def __post_init__(self) -> None:
        weights = (self.w_equ, self.w_g, self.w_u)
        if any(w < 0.0 for w in weights):
            raise DomainError(f"loss weights must be non-negative, got {weights}")
        if not any(w > 0.0 for w in weights):
            raise DomainError("at least one loss weight must be positive")


class LossTerms(NamedTuple):
    """Weighted total and its unweighted components, all on the same tape."""

    total: Tensor
    equ: Tensor
    g: Tensor
    u: Tensor

    def values(self) -> dict[str, float]:
        return {name: float(tape.value_of(term)) for name, term in self._asdict().items()}


def draw_group_pair(
    epoch_key: RngKey, point_ids: np.ndarray, m: int, d: int
) -> tuple[SampleGroup, SampleGroup]:
    """Two independent groups per residual point, keyed (epoch, point, group)."""
    groups = [
        SampleGroup.stack(
            [draw_sample_group(epoch_key.child(GROUP_STREAM, int(i), gr), m, d) for i in point_ids]
        )
        for gr in (0, 1)
    ]
    return groups[0], groups[1]


def residual_products(
    surrogate: Surrogate,
    problem: Problem,
    params: ParamSource,
    batch: ResidualBatch,
    groups: tuple[SampleGroup, SampleGroup],
    cfg: EstimatorConfig,
    mode: str = "paired",
) -> Tensor:
    """Per-point products of the two residual estimates, shape (n,).

    Both groups run through one residual evaluation (the groups are joined
    along the sample axis), so the centre value is computed once per point.
    """
    if mode not in LOSS_MODES:
        raise ContractViolation(f"unknown loss mode {mode!r}; choose from {LOSS_MODES}")
    if batch.forcing is None or len(batch.forcing) != len(batch):
        raise ContractViolation("every residual point needs a forcing value")
    first, second = groups
    m = first.m
    if second.m != m:
        raise ContractViolation("paired groups must have the same sample count")
    samples = residual_estimate(
        surrogate,
        batch.x,
        batch.t,
        problem.coefficients(params, batch),
        batch.forcing,
        cfg,
        first.join(second),
        static_aux=problem.aux_for(batch),
        per_sample=True,
    )
    r1 = tape.getitem(samples, (..., slice(0, m)))
    r2 = tape.getitem(samples, (..., slice(m, 2 * m)))
    if mode == "paired":
        return tape.mean(tape.mul(r1, r2), axis=-1)
    return tape.mul(tape.mean(r1, axis=-1), tape.mean(r2, axis=-1))


def equation_loss(
    params: ParamSource,
    problem: Problem,
    batch: ResidualBatch,
    epoch_key: RngKey,
    cfg: EstimatorConfig,
    mode: str = "paired",
    counter: EvalCounter | None = None,
    point_ids: np.ndarray | None = None,
) -> Tensor:
    """Unbiased estimate of mean_i (L[u](x_i, t_i) - f_i)^2 over the batch."""
    ids = np.arange(len(batch)) if point_ids is None else point_ids
    groups = draw_group_pair(epoch_key, ids, cfg.m, problem.d)
    surrogate = problem.make_surrogate(params, counter)
    return tape.mean(residual_products(surrogate, problem, params, batch, groups, cfg, mode))


def misfit_loss(surrogate: Surrogate, points: ObservationSet) -> Tensor:
    """Mean squared misfit over ``points``; 0.0 for an empty set."""
    if len(points) == 0:
        return 0.0
    pred = surrogate(points.x, points.aux())
    diff = tape.sub(pred, points.values)
    return tape.mean(tape.mul(diff, diff))


def data_loss(surrogate: Surrogate, points: ObservationSet) -> Tensor:
    return misfit_loss(surrogate, points)


def init_loss(surrogate: Surrogate, points: ObservationSet) -> Tensor:
    return misfit_loss(surrogate, points)


def total_loss(
    params: ParamSource,
    problem: Problem,
    batch: ResidualBatch,
    epoch_key: RngKey,
    dataset: Dataset,
    weights: LossWeights,
    cfg: EstimatorConfig,
    mode: str = "paired",
    counter: EvalCounter | None = None,
) -> LossTerms:
    """w_equ * L_equ + w_g * L_g + w_u * L_u on a single tape."""
    equ = (
        equation_loss(params, problem, batch, epoch_key, cfg, mode, counter)
        if weights.w_equ > 0.0
        else 0.0
    )
    surrogate = problem.make_surrogate(params, counter)
    g = init_loss(surrogate, dataset.d_g) if weights.w_g > 0.0 else 0.0
    u = data_loss(surrogate, dataset.d_u) if weights.w_u > 0.0 else 0.0
    total = tape.add(
        tape.add(tape.mul(weights.w_equ, equ), tape.mul(weights.w_g, g)),
        tape.mul(weights.w_u, u),
    )
    return LossTerms(total=total, equ=equ, g=g, u=u)
