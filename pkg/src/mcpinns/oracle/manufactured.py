"""Manufactured solutions and their closed-form forcings.

The profile (1 - |x|^2)_+^(1 + alpha/2) has a fractional Laplacian that is a
quadratic polynomial inside the unit ball, which makes it the reference field
for every estimator and training check.
"""

from dataclasses import dataclass

import numpy as np

from mcpinns._typing import checked
from mcpinns.autodiff import tape
from mcpinns.autodiff.tape import Tensor
from mcpinns.core.special import gamma, mittag_leffler
from mcpinns.errors import ContractViolation, DomainError

PROFILES = ("smooth", "parabolic")


def _sq_norm(x: Tensor) -> Tensor:
    return tape.sum(tape.mul(x, x), axis=-1)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")


@checked
def exact_solution_laplacian(x: np.ndarray, d: int, alpha: float) -> np.ndarray:
    """(1 - |x|^2)_+^(1 + alpha/2), zero outside the unit ball."""
    _check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != d:
        raise ContractViolation(f"expected points of dimension {d}, got shape {x.shape}")
    inside = np.maximum(1.0 - np.sum(x * x, axis=-1), 0.0)
    return inside ** (1.0 + alpha / 2.0)


def exact_solution_ade(
    x: np.ndarray, t: np.ndarray | float, alpha: float, profile: str = "smooth"
) -> np.ndarray:
    """Space-time manufactured solution: spatial profile times e^(-t)."""
    x = np.asarray(x, dtype=np.float64)
    decay = np.exp(-np.asarray(t, dtype=np.float64))
    if profile == "smooth":
        return exact_solution_laplacian(x, x.shape[-1], alpha) * decay
    if profile == "parabolic":
        return np.maximum(1.0 - np.sum(x * x, axis=-1), 0.0) * decay
    raise ContractViolation(f"unknown profile {profile!r}; choose from {PROFILES}")


@checked
def forcing_laplacian(x: np.ndarray, d: int, alpha: float) -> np.ndarray:
    """(-Delta)^(alpha/2) of the manufactured profile, valid for |x| <= 1."""
    _check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64)
    scale = (
        2.0**alpha
        * float(gamma(alpha / 2.0 + 2.0))
        * float(gamma((alpha + d) / 2.0))
        / float(gamma(d / 2.0))
    )
    return scale * (1.0 - (1.0 + alpha / d) * np.sum(x * x, axis=-1))


def caputo_exp_decay(t: np.ndarray | float, gamma_order: float) -> np.ndarray | float:
    """Caputo derivative of e^(-t): -t^(1-gamma) E_{1,2-gamma}(-t)."""
    t_arr = np.asarray(t, dtype=np.float64)
    value = -(t_arr ** (1.0 - gamma_order)) * np.asarray(
        mittag_leffler(1.0, 2.0 - gamma_order, -t_arr)
    )
    return float(value) if value.ndim == 0 else value


def profile_gradient(x: np.ndarray, alpha: float) -> np.ndarray:
    """Gradient of (1 - |x|^2)^(1 + alpha/2) inside the ball."""
    x = np.asarray(x, dtype=np.float64)
    inside = np.maximum(1.0 - np.sum(x * x, axis=-1), 0.0)
    return (-2.0 * (1.0 + alpha / 2.0) * inside ** (alpha / 2.0))[..., None] * x


def forcing_ade(
    x: np.ndarray,
    t: np.ndarray | float,
    d: int,
    alpha: float,
    gamma_order: float,
    c: float,
    v: np.ndarray | None,
) -> np.ndarray:
    """Forcing of the advection-diffusion family for the (default) e^(-t) profile.

    Linear in ``c`` and in each component of ``v``.
    """
    x = np.asarray(x, dtype=np.float64)
    t_arr = np.asarray(t, dtype=np.float64)
    decay = np.exp(-t_arr)
    phi = exact_solution_laplacian(x, d, alpha)
    time_part = caputo_exp_decay(t_arr, gamma_order)
    f = time_part * phi + c * decay * forcing_laplacian(x, d, alpha)
    if v is not None:
        v = np.asarray(v, dtype=np.float64)
        f = f + decay * np.sum(profile_gradient(x, alpha) * v, axis=-1)
    return f


@dataclass(frozen=True)
class ManufacturedField:
    """The manufactured profile as a field ``u(x, aux)``.

    Built on tape primitives, so shifted points that depend on traced orders
    stay differentiable. With ``time_dependent`` the first aux column is time and
    the profile is multiplied by e^(-t). ``scale`` gives non-solution fields
    with a known residual.
    """

    alpha: float
    time_dependent: bool = False
    profile: str = "smooth"
    scale: float = 1.0

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.profile not in PROFILES:
            raise ContractViolation(f"unknown profile {self.profile!r}; choose from {PROFILES}")

    @property
    def exponent(self) -> float:
        return 1.0 + self.alpha / 2.0 if self.profile == "smooth" else 1.0

    def _time_factor(self, aux: Tensor | None) -> Tensor:
        if not self.time_dependent:
            return self.scale
        if aux is None:
            raise ContractViolation("time-dependent field needs time in aux")
        t = tape.getitem(aux, (..., 0))
        return tape.mul(self.scale, tape.exp(tape.neg(t)))

    def __call__(self, x: Tensor, aux: Tensor | None = None) -> Tensor:
        inside = tape.relu(tape.sub(1.0, _sq_norm(x)))
        return tape.mul(tape.power(inside, self.exponent), self._time_factor(aux))

    def with_tangent(
        self, x: Tensor, aux: Tensor | None, direction: Tensor
    ) -> tuple[Tensor, Tensor]:
        inside = tape.relu(tape.sub(1.0, _sq_norm(x)))
        factor = self._time_factor(aux)
        value = tape.mul(tape.power(inside, self.exponent), factor)
        if self.profile == "smooth":
            slope = tape.mul(-2.0 * self.exponent, tape.power(inside, self.exponent - 1.0))
        else:
            slope = -2.0 * (tape.value_of(inside) > 0.0)
        along = tape.sum(tape.mul(x, direction), axis=-1)
        return value, tape.mul(tape.mul(slope, along), factor)


@dataclass(frozen=True)
class ConstantField:
    value: float

    def __call__(self, x: Tensor, aux: Tensor | None = None) -> Tensor:
        shape = tape.value_of(x).shape[:-1]
        return np.full(shape, self.value)

    def with_tangent(
        self, x: Tensor, aux: Tensor | None, direction: Tensor
    ) -> tuple[Tensor, Tensor]:
        shape = tape.value_of(x).shape[:-1]
        return np.full(shape, self.value), np.zeros(shape)


def exp_decay(t: np.ndarray | float) -> np.ndarray:
    """Time slice e^(-t) used by the Caputo diagnostics."""
    return np.exp(-np.asarray(t, dtype=np.float64))


def monomial_caputo(t: float, k: int, gamma_order: float) -> float:
    """Caputo derivative of t^k: Gamma(k+1)/Gamma(k+1-gamma) t^(k-gamma)."""
    return float(gamma(k + 1.0)) / float(gamma(k + 1.0 - gamma_order)) * t ** (k - gamma_order)
