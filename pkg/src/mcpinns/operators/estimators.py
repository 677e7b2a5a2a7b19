"""Monte Carlo estimators of the fractional Laplacian and Caputo derivative.

Every estimator is a pure function of its inputs: the random part is passed in
as a ``SampleGroup`` holding the raw uniforms and directions, and radii / time
fractions are rebuilt from those uniforms for the current alpha and gamma. With
traced alpha or gamma the rebuilt draws stay on the tape, which gives pathwise
gradients with respect to the fractional orders.

Fields are callables ``u(x, aux)`` where ``x`` has shape ``(..., d)`` and
``aux`` holds the non-spatial network inputs (time, parametric inputs) with
shape ``(..., k)`` or is None.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from mcpinns._typing import checked
from mcpinns.autodiff import tape
from mcpinns.autodiff.tape import Tensor
from mcpinns.core.rng import RngKey
from mcpinns.core.sampling import uniform_open_left, unit_sphere_from
from mcpinns.core.special import sphere_area
from mcpinns.errors import ContractViolation, DomainError

_LOG2 = math.log(2.0)


@runtime_checkable
class Field(Protocol):
    """Scalar field u(x, aux) evaluated on batches of points."""

    def __call__(self, x: Tensor, aux: Tensor | None = None) -> Tensor: ...


@runtime_checkable
class TangentField(Field, Protocol):
    """A field that can also return a spatial directional derivative."""

    def with_tangent(
        self, x: Tensor, aux: Tensor | None, direction: Tensor
    ) -> tuple[Tensor, Tensor]: ...


@dataclass(frozen=True)
class EstimatorConfig:
    """Sample count, ball-split radius and the two clamping floors."""

    m: int = 20
    r0: float = 0.2
    eps: float = 1e-3
    eps_t: float = 1e-6

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if not 0.0 < self.eps < self.r0:
            raise DomainError(f"need 0 < eps < r0, got eps={self.eps}, r0={self.r0}")
        if self.eps_t <= 0.0:
            raise DomainError(f"eps_t must be positive, got {self.eps_t}")


@dataclass(frozen=True, eq=False)
class SampleGroup:
    """Raw draws for m single-sample estimates at each residual point.

    Arrays carry a leading batch shape: ``xi`` is ``batch + (m, d)``, the three
    uniform arrays are ``batch + (m,)``. Uniforms lie in (0, 1].
    """

    xi: np.ndarray
    u_r_inner: np.ndarray
    u_r_outer: np.ndarray
    u_tau: np.ndarray

    @property
    def m(self) -> int:
        return int(self.u_r_inner.shape[-1])

    @property
    def d(self) -> int:
        return int(self.xi.shape[-1])

    @classmethod
    def from_generator(
        cls, gen: np.random.Generator, m: int, d: int, batch: tuple[int, ...] = ()
    ) -> "SampleGroup":
        shape = tuple(batch) + (m,)
        return cls(
            xi=unit_sphere_from(gen, d, shape),
            u_r_inner=uniform_open_left(gen, shape),
            u_r_outer=uniform_open_left(gen, shape),
            u_tau=uniform_open_left(gen, shape),
        )

    @classmethod
    def stack(cls, groups: list["SampleGroup"]) -> "SampleGroup":
        """Stack per-point groups along a new leading batch axis."""
        return cls(
            xi=np.stack([g.xi for g in groups]),
            u_r_inner=np.stack([g.u_r_inner for g in groups]),
            u_r_outer=np.stack([g.u_r_outer for g in groups]),
            u_tau=np.stack([g.u_tau for g in groups]),
        )

    def take(self, index: slice | np.ndarray) -> "SampleGroup":
        return SampleGroup(
            xi=self.xi[index],
            u_r_inner=self.u_r_inner[index],
            u_r_outer=self.u_r_outer[index],
            u_tau=self.u_tau[index],
        )

    def join(self, other: "SampleGroup") -> "SampleGroup":
        """Append the samples of ``other`` along the sample axis (m grows)."""
        return SampleGroup(
            xi=np.concatenate([self.xi, other.xi], axis=-2),
            u_r_inner=np.concatenate([self.u_r_inner, other.u_r_inner], axis=-1),
            u_r_outer=np.concatenate([self.u_r_outer, other.u_r_outer], axis=-1),
            u_tau=np.concatenate([self.u_tau, other.u_tau], axis=-1),
        )

    def single(self, j: int) -> "SampleGroup":
        """The j-th sample of every point, as a group with m = 1."""
        sl = slice(j, j + 1)
        return SampleGroup(
            xi=self.xi[..., sl, :],
            u_r_inner=self.u_r_inner[..., sl],
            u_r_outer=self.u_r_outer[..., sl],
            u_tau=self.u_tau[..., sl],
        )

    # Derived draws, rebuilt from the retained uniforms.

    def inner_radii(self, alpha: Tensor, r0: float) -> Tensor:
        """r_I = r0 * U^(1/(2 - alpha)), distributed as r0 * Beta(2 - alpha, 1)."""
        a = _per_sample(alpha, self.u_r_inner.ndim)
        return tape.mul(r0, tape.exp(tape.div(np.log(self.u_r_inner), tape.sub(2.0, a))))

    def outer_radii(self, alpha: Tensor, r0: float) -> Tensor:
        """r_O = r0 * U^(-1/alpha), so r0 / r_O ~ Beta(alpha, 1)."""
        a = _per_sample(alpha, self.u_r_outer.ndim)
        return tape.mul(r0, tape.exp(tape.div(-np.log(self.u_r_outer), a)))

    def time_fractions(self, gamma: Tensor) -> Tensor:
        """tau = U^(1/(1 - gamma)), distributed as Beta(1 - gamma, 1)."""
        g = _per_sample(gamma, self.u_tau.ndim)
        return tape.exp(tape.div(np.log(self.u_tau), tape.sub(1.0, g)))


@checked
def draw_sample_group(key: RngKey, m: int, d: int, batch: tuple[int, ...] = ()) -> SampleGroup:
    """Draw one SampleGroup from the stream identified by ``key``."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    return SampleGroup.from_generator(key.generator(), m, d, batch)


@dataclass(frozen=True, eq=False)
class PdeCoefficients:
    """Coefficients of the residual operator.

    Any entry may be a float, a per-point array or a traced Node. ``gamma``,
    ``v`` and ``mu`` are optional; an absent entry removes its term.
    """

    alpha: Tensor
    gamma: Tensor | None = None
    c: Tensor = 1.0
    v: Tensor | None = None
    mu: Tensor | None = None


def _per_sample(coeff: Tensor, ndim: int) -> Tensor:
    """Give a per-point coefficient a trailing sample axis so it broadcasts over m."""
    value = tape.value_of(coeff)
    if value.ndim == 0 or ndim <= value.ndim:
        return coeff
    return tape.reshape(coeff, value.shape + (1,) * (ndim - value.ndim))


def _column(value: Tensor, like_ndim: int) -> Tensor:
    """Append a trailing unit axis so per-point values broadcast over samples."""
    shape = tape.value_of(value).shape
    if len(shape) >= like_ndim:
        return value
    return tape.reshape(value, shape + (1,))


def _reduce(samples: Tensor, per_sample: bool) -> Tensor:
    return samples if per_sample else tape.mean(samples, axis=-1)


def _check_open_interval(name: str, value: Tensor, low: float, high: float) -> None:
    v = tape.value_of(value)
    if np.any(v <= low) or np.any(v >= high):
        raise DomainError(f"{name} must lie in ({low}, {high}), got {v}")


def frac_laplacian_constant(d: int, alpha: Tensor) -> Tensor:
    """C_{d,alpha} * |S^{d-1}| on the tape.

    Uses |Gamma(-alpha/2)| = 2 Gamma(1 - alpha/2) / alpha, so no primitive ever
    sees a negative Gamma argument.
    """
    two_pow = tape.exp(tape.mul(tape.sub(alpha, 1.0), _LOG2))
    num = tape.mul(tape.mul(alpha, two_pow), tape.gamma(tape.div(tape.add(alpha, float(d)), 2.0)))
    den = tape.mul(math.pi ** (d / 2.0), tape.gamma(tape.sub(1.0, tape.div(alpha, 2.0))))
    return tape.mul(tape.div(num, den), sphere_area(d))


def _expand_aux(aux: Tensor | None, n: int) -> Tensor | None:
    """Repeat per-point aux inputs of shape (..., k) across n shifted points."""
    if aux is None:
        return None
    value = tape.value_of(aux)
    lead, k = value.shape[:-1], value.shape[-1]
    return tape.broadcast_to(tape.reshape(aux, lead + (1, k)), lead + (n, k))


def mc_frac_laplacian(
    u: Field,
    x: np.ndarray,
    alpha: Tensor,
    cfg: EstimatorConfig,
    g: SampleGroup,
    *,
    aux: Tensor | None = None,
    u_center: Tensor | None = None,
    per_sample: bool = False,
) -> Tensor:
    """Ball-split Monte Carlo estimate of (-Delta)^(alpha/2) u at ``x``.

    The 4m shifted evaluations go through a single call of ``u``; the centre
    value is reused when ``u_center`` is given. Returns the batch shape of
    ``x``, or ``batch + (m,)`` single-sample estimates with ``per_sample``.
    """
    _check_open_interval("alpha", alpha, 0.0, 2.0)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != g.d:
        raise ContractViolation(f"point dimension {x.shape[-1]} != sample dimension {g.d}")
    m = g.m
    if u_center is None:
        u_center = u(x, aux)

    r_inner = tape.maximum(g.inner_radii(alpha, cfg.r0), cfg.eps)
    r_outer = g.outer_radii(alpha, cfg.r0)
    xc = x[..., None, :]
    inner_step = tape.mul(tape.reshape(r_inner, tape.value_of(r_inner).shape + (1,)), g.xi)
    outer_step = tape.mul(tape.reshape(r_outer, tape.value_of(r_outer).shape + (1,)), g.xi)
    shifted = tape.concat(
        [
            tape.sub(xc, inner_step),
            tape.add(xc, inner_step),
            tape.sub(xc, outer_step),
            tape.add(xc, outer_step),
        ],
        axis=-2,
    )
    values = u(shifted, _expand_aux(aux, 4 * m))
    in_minus = tape.getitem(values, (..., slice(0, m)))
    in_plus = tape.getitem(values, (..., slice(m, 2 * m)))
    out_minus = tape.getitem(values, (..., slice(2 * m, 3 * m)))
    out_plus = tape.getitem(values, (..., slice(3 * m, 4 * m)))

    ndim = g.u_r_inner.ndim
    centre2 = tape.mul(2.0, _column(u_center, ndim))
    inner_q = tape.div(
        tape.sub(tape.sub(centre2, in_minus), in_plus), tape.mul(r_inner, r_inner)
    )
    outer_q = tape.sub(tape.sub(centre2, out_minus), out_plus)

    a = _per_sample(alpha, ndim)
    log_r0 = math.log(cfg.r0)
    inner_w = tape.div(tape.exp(tape.mul(tape.sub(2.0, a), log_r0)), tape.mul(2.0, tape.sub(2.0, a)))
    outer_w = tape.div(tape.exp(tape.mul(tape.neg(a), log_r0)), tape.mul(2.0, a))
    samples = tape.mul(
        frac_laplacian_constant(g.d, a),
        tape.add(tape.mul(inner_w, inner_q), tape.mul(outer_w, outer_q)),
    )
    return _reduce(samples, per_sample)


def mc_caputo(
    u_t: Callable[[Tensor], Tensor],
    t: np.ndarray | float,
    gamma: Tensor,
    cfg: EstimatorConfig,
    g: SampleGroup,
    *,
    u_now: Tensor | None = None,
    u_zero: Tensor | None = None,
    per_sample: bool = False,
) -> Tensor:
    """Monte Carlo estimate of the Caputo derivative of order gamma at time ``t``.

    ``u_t`` maps times of shape ``batch`` or ``batch + (m,)`` to field values at
    the fixed spatial point(s). The whole estimate carries the 1/Gamma(1 - gamma)
    prefactor of the Caputo definition.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0):
        raise DomainError(f"Caputo estimate needs t > 0, got {t}")
    _check_open_interval("gamma", gamma, 0.0, 1.0)
    if u_now is None:
        u_now = u_t(t)
    if u_zero is None:
        u_zero = u_t(np.zeros_like(t))

    ndim = g.u_tau.ndim
    t_col = t[..., None]
    tau_eps = tape.maximum(g.time_fractions(gamma), cfg.eps_t / t_col)
    lag = tape.mul(tau_eps, t_col)
    u_lag = u_t(tape.sub(t_col, lag))
    quotient = tape.div(tape.sub(_column(u_now, ndim), u_lag), lag)

    log_t = np.log(t_col)
    one_minus = tape.sub(1.0, gamma)
    history = tape.mul(
        tape.mul(tape.div(gamma, one_minus), tape.exp(tape.mul(one_minus, log_t))), quotient
    )
    jump = tape.div(
        tape.sub(_column(u_now, ndim), _column(u_zero, ndim)),
        tape.exp(tape.mul(gamma, log_t)),
    )
    samples = tape.div(tape.add(history, jump), tape.gamma(one_minus))
    return _reduce(samples, per_sample)


def _time_aux(t: Tensor, static: np.ndarray | None, lead: tuple[int, ...]) -> Tensor:
    """Network aux inputs [t, static...] for times of shape ``lead``."""
    t_col = tape.reshape(t, lead + (1,))
    if static is None:
        return t_col
    extra = static
    while extra.ndim - 1 < len(lead):
        extra = extra[..., None, :]
    extra = np.broadcast_to(extra, lead + static.shape[-1:])
    return tape.concat([t_col, extra], axis=-1)


def residual_estimate(
    u_fn: Field,
    x: np.ndarray,
    t: np.ndarray | None,
    coeffs: PdeCoefficients,
    f_value: np.ndarray | float,
    cfg: EstimatorConfig,
    g: SampleGroup,
    *,
    static_aux: np.ndarray | None = None,
    per_sample: bool = False,
) -> Tensor:
    """Estimate L[u](x, t) - f at a batch of residual points.

    Assembles the Caputo term (when gamma is set), the scaled fractional
    Laplacian, the advection term v . grad u (when v is set) and the reaction
    term mu * u (when mu is set). All terms share one centre evaluation.
    ``static_aux`` carries per-point parametric inputs appended after time.
    With ``per_sample`` the result keeps a trailing axis of m single-sample
    residuals, each with the forcing subtracted.
    """
    x = np.asarray(x, dtype=np.float64)
    lead = x.shape[:-1]
    time_dependent = coeffs.gamma is not None
    if time_dependent and t is None:
        raise ContractViolation("a time-fractional residual needs residual times")

    if time_dependent:
        aux = _time_aux(np.asarray(t, dtype=np.float64), static_aux, lead)
    else:
        aux = static_aux

    if coeffs.v is not None:
        if not isinstance(u_fn, TangentField):
            raise ContractViolation("advection term needs a field with directional derivatives")
        u_center, du_v = u_fn.with_tangent(x, aux, coeffs.v)
    else:
        u_center, du_v = u_fn(x, aux), None

    ndim = g.u_r_inner.ndim
    total = tape.mul(
        _per_sample(coeffs.c, ndim),
        mc_frac_laplacian(
            u_fn, x, coeffs.alpha, cfg, g, aux=aux, u_center=u_center, per_sample=True
        ),
    )

    if time_dependent:
        t_arr = np.asarray(t, dtype=np.float64)
        m = g.m

        def u_at_times(times: Tensor) -> Tensor:
            if tape.value_of(times).shape == lead:
                return u_fn(x, _time_aux(times, static_aux, lead))
            pts = np.broadcast_to(x[..., None, :], lead + (m, x.shape[-1]))
            return u_fn(pts, _time_aux(times, static_aux, lead + (m,)))

        u_zero = u_at_times(np.zeros_like(t_arr))
        caputo = mc_caputo(
            u_at_times, t_arr, coeffs.gamma, cfg, g, u_now=u_center, u_zero=u_zero, per_sample=True
        )
        total = tape.add(total, caputo)

    local = tape.neg(np.asarray(f_value, dtype=np.float64))
    if du_v is not None:
        local = tape.add(local, du_v)
    if coeffs.mu is not None:
        local = tape.add(local, tape.mul(coeffs.mu, u_center))
    total = tape.add(total, _column(tape.broadcast_to(local, lead) if lead else local, ndim))
    return _reduce(total, per_sample)
