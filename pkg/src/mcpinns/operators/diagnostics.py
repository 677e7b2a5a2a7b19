"""Estimator diagnostics: Monte Carlo statistics against reference values.

A sweep draws ``n_estimates`` independent estimates per (m, r0) cell, each
averaging m samples, and compares their mean with the reference value of the
operator at the same point.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from mcpinns.autodiff import tape
from mcpinns.autodiff.tape import Tensor
from mcpinns.core.rng import RngKey
from mcpinns.errors import AccuracyError, ContractViolation
from mcpinns.instrumentation import EvalCounter
from mcpinns.operators.estimators import (
    EstimatorConfig,
    Field,
    draw_sample_group,
    mc_caputo,
    mc_frac_laplacian,
)
from mcpinns.oracle.manufactured import (
    ConstantField,
    ManufacturedField,
    caputo_exp_decay,
    forcing_laplacian,
)
from mcpinns.oracle.quadrature import MAX_ORACLE_DIM, quad_frac_laplacian

logger = logging.getLogger("mcpinns.operators")

DIAGNOSTIC_FIELDS = ("manufactured", "parabolic", "constant", "exp_t")


@dataclass(frozen=True)
class SweepCell:
    """Statistics of one (m, r0) cell."""

    m: int
    r0: float
    n_estimates: int
    mean: float
    stderr: float
    reference: float | None
    z: float | None
    evals_per_estimate: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class CountingField:
    """Wraps a field and counts the points it is evaluated at."""

    def __init__(self, inner: Field, d: int, counter: EvalCounter):
        self.inner = inner
        self.d = d
        self.counter = counter

    def __call__(self, x: Tensor, aux: Tensor | None = None) -> Tensor:
        self.counter.record(int(np.prod(tape.value_of(x).shape[:-1])))
        return self.inner(x, aux)


def diagnostic_field(name: str, alpha: float, constant: float = 1.0) -> Field:
    if name == "manufactured":
        return ManufacturedField(alpha)
    if name == "parabolic":
        return ManufacturedField(alpha, profile="parabolic")
    if name == "constant":
        return ConstantField(constant)
    raise ContractViolation(
        f"no spatial diagnostic field {name!r}; choose from {DIAGNOSTIC_FIELDS}"
    )


def laplacian_reference(name: str, point: np.ndarray, alpha: float) -> float | None:
    """Reference (-Delta)^(alpha/2) of a diagnostic field, or None when unavailable."""
    d = point.size
    if name == "manufactured":
        return float(forcing_laplacian(point, d, alpha))
    if name == "constant":
        return 0.0
    if d > MAX_ORACLE_DIM:
        return None
    field = ManufacturedField(alpha, profile="parabolic")
    try:
        return quad_frac_laplacian(lambda p: float(tape.value_of(field(p))), point, alpha)
    except AccuracyError as e:
        logger.warning("quadrature reference did not converge at %s: %s", point, e)
        return None


def _cell(
    values: np.ndarray, m: int, r0: float, reference: float | None, counter: EvalCounter
) -> SweepCell:
    n = values.size
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    z = None
    if reference is not None:
        diff = mean - reference
        if stderr > 0.0:
            z = diff / stderr
        else:
            z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return SweepCell(
        m=m,
        r0=r0,
        n_estimates=n,
        mean=mean,
        stderr=stderr,
        reference=reference,
        z=z,
        evals_per_estimate=counter.points / n,
    )


def laplacian_sweep(
    field_name: str,
    point: Sequence[float],
    alpha: float,
    m_values: Sequence[int],
    r0_values: Sequence[float],
    n_estimates: int,
    key: RngKey,
    *,
    eps: float = 1e-3,
    constant: float = 1.0,
) -> tuple[list[SweepCell], bool]:
    """Sweep the fractional Laplacian estimator; returns (cells, reference_available)."""
    x0 = np.asarray(point, dtype=np.float64).reshape(-1)
    d = x0.size
    field = diagnostic_field(field_name, alpha, constant)
    reference = laplacian_reference(field_name, x0, alpha)
    if reference is None:
        logger.warning("no reference for field %r in d=%d; reporting MC statistics only", field_name, d)
    x = np.broadcast_to(x0, (n_estimates, d))
    cells = []
    for i, m in enumerate(m_values):
        for j, r0 in enumerate(r0_values):
            cfg = EstimatorConfig(m=m, r0=r0, eps=eps)
            group = draw_sample_group(key.child(i, j), m, d, batch=(n_estimates,))
            counter = EvalCounter()
            estimates = mc_frac_laplacian(CountingField(field, d, counter), x, alpha, cfg, group)
            cells.append(_cell(np.asarray(tape.value_of(estimates)), m, r0, reference, counter))
            logger.debug("laplacian cell m=%d r0=%s: %s", m, r0, cells[-1])
    return cells, reference is not None


def caputo_sweep(
    t: float,
    gamma_order: float,
    m_values: Sequence[int],
    n_estimates: int,
    key: RngKey,
    *,
    eps_t: float = 1e-6,
) -> list[SweepCell]:
    """Sweep the Caputo estimator on e^(-t) against its Mittag-Leffler closed form."""
    reference = float(caputo_exp_decay(t, gamma_order))
    times = np.full(n_estimates, float(t))
    cells = []
    for i, m in enumerate(m_values):
        cfg = EstimatorConfig(m=m, eps_t=eps_t)
        group = draw_sample_group(key.child(i, 0), m, 1, batch=(n_estimates,))
        counter = EvalCounter()

        def u_t(s: Tensor) -> Tensor:
            counter.record(int(np.prod(tape.value_of(s).shape)))
            return tape.exp(tape.neg(s))

        estimates = mc_caputo(u_t, times, gamma_order, cfg, group)
        cells.append(_cell(np.asarray(tape.value_of(estimates)), m, cfg.r0, reference, counter))
    return cells
