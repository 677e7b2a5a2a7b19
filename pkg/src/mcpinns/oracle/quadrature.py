"""Adaptive-quadrature references for the fractional operators.

Slow and deterministic. The fractional Laplacian is written in symmetrised
radial form

    C_{d,alpha}/2 * int_{S^{d-1}} int_0^inf (2u(x) - u(x - r xi) - u(x + r xi)) r^(-1-alpha) dr dxi

for fields supported in the closed unit ball. The radial integral uses QUADPACK
(``scipy.integrate.quad``): an algebraic-weight rule near r = 0, breakpoints at
the two ball exit radii, and a closed-form tail once both shifted points have
left the ball. Angular integration is exact for d = 1 and refined by doubling
for d = 2 and 3 until two levels agree.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from mcpinns._typing import checked
from mcpinns.core.special import frac_constants, gamma
from mcpinns.errors import AccuracyError, ContractViolation, DomainError

logger = logging.getLogger("mcpinns.oracle")

SpatialField = Callable[[np.ndarray], np.ndarray | float]
TimeSlice = Callable[[float], float]

MAX_ORACLE_DIM = 3

# Below this radius the second difference is replaced by its value at the
# floor; the dropped part is O(floor^(2 - alpha)).
_R_FLOOR = 1e-4


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for the reference computations.

    ``abs_tol`` is requested from each 1-D rule; a result whose reported error
    exceeds ``error_budget`` raises ``AccuracyError``. ``split_radius`` is where
    the singular-weight rule near r = 0 hands over to the plain adaptive rule.
    """

    abs_tol: float = 1e-9
    max_subdivisions: int = 2**14
    split_radius: float = 0.2
    error_budget: float = 1e-7
    max_angular_nodes: int = 2**11
    fd_step: float = 1e-6

    def __post_init__(self) -> None:
        if self.abs_tol <= 0.0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.split_radius <= 0.0:
            raise DomainError("split_radius must be positive")


class QuadResult(NamedTuple):
    value: float
    error: float


def _quad(
    f: Callable[[float], float], a: float, b: float, spec: QuadSpec, **kwargs: object
) -> QuadResult:
    if b <= a:
        return QuadResult(0.0, 0.0)
    out = integrate.quad(
        f,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=0.0,
        limit=spec.max_subdivisions,
        full_output=1,
        **kwargs,
    )
    value, error = float(out[0]), float(out[1])
    if len(out) > 3 and error > spec.error_budget:
        raise AccuracyError(f"quadrature on [{a}, {b}] did not converge: {out[3]}", value, error)
    return QuadResult(value, error)


def _exit_radius(x: np.ndarray, xi: np.ndarray) -> float:
    """Distance from x along xi to the unit sphere (x inside the closed ball)."""
    b = float(np.dot(x, xi))
    disc = max(b * b + 1.0 - float(np.dot(x, x)), 0.0)
    return -b + math.sqrt(disc)


def radial_integral(
    u: SpatialField, x: np.ndarray, xi: np.ndarray, alpha: float, spec: QuadSpec
) -> QuadResult:
    """int_0^inf (2u(x) - u(x - r xi) - u(x + r xi)) r^(-1-alpha) dr for one direction."""
    ux = float(u(x))

    def second_difference(r: float) -> float:
        return 2.0 * ux - float(u(x - r * xi)) - float(u(x + r * xi))

    exits = sorted((_exit_radius(x, xi), _exit_radius(x, -xi)))
    far = exits[-1]
    near = min(spec.split_radius, 0.5 * exits[0]) if exits[0] > 0.0 else spec.split_radius
    near = min(near, far) if far > 0.0 else near

    def inner(r: float) -> float:
        rr = max(r, _R_FLOOR)
        return second_difference(rr) / (rr * rr)

    head = _quad(inner, 0.0, near, spec, weight="alg", wvar=(1.0 - alpha, 0.0))
    breaks = [p for p in exits if near < p < far]
    body = _quad(
        lambda r: second_difference(r) * r ** (-1.0 - alpha),
        near,
        far,
        spec,
        points=breaks or None,
    )
    start = max(far, near)
    tail = 2.0 * ux * start ** (-alpha) / alpha
    return QuadResult(head.value + body.value + tail, head.error + body.error)


def _sphere_level(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights of an angular rule over S^{d-1} (weights sum to |S^{d-1}|)."""
    if d == 2:
        # I(xi) = I(-xi), so the half circle with doubled weight covers S^1.
        theta = np.pi * np.arange(n) / n
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return dirs, np.full(n, 2.0 * np.pi / n)
    mu, w_mu = np.polynomial.legendre.leggauss(n)
    phi = 2.0 * np.pi * np.arange(2 * n) / (2 * n)
    sin_t = np.sqrt(1.0 - mu**2)
    dirs = np.stack(
        [
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.repeat(mu, 2 * n),
        ],
        axis=-1,
    )
    weights = np.outer(w_mu, np.full(2 * n, 2.0 * np.pi / (2 * n))).ravel()
    return dirs, weights


def quad_frac_laplacian_with_error(
    u: SpatialField, x: np.ndarray, alpha: float, spec: QuadSpec | None = None
) -> QuadResult:
    """Reference (-Delta)^(alpha/2) u at ``x`` with its estimated error."""
    spec = spec or QuadSpec()
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    d = x.size
    if d > MAX_ORACLE_DIM:
        raise ContractViolation(f"quadrature oracle supports d <= {MAX_ORACLE_DIM}, got {d}")
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if float(np.dot(x, x)) > 1.0:
        raise DomainError("quadrature oracle evaluates points inside the closed unit ball")
    const = frac_constants(d, alpha).c_d_alpha

    if d == 1:
        res = radial_integral(u, x, np.ones(1), alpha, spec)
        return QuadResult(const * res.value, const * res.error)

    n = 8
    previous: float | None = None
    error = 0.0
    while True:
        dirs, weights = _sphere_level(d, n)
        parts = [radial_integral(u, x, xi, alpha, spec) for xi in dirs]
        total = 0.5 * const * float(np.dot(weights, [p.value for p in parts]))
        error = 0.5 * const * float(np.dot(weights, [p.error for p in parts]))
        if previous is not None and abs(total - previous) <= spec.error_budget:
            logger.debug("angular rule converged with %d directions", len(dirs))
            return QuadResult(total, error + abs(total - previous))
        if len(dirs) * 2 > spec.max_angular_nodes:
            diff = abs(total - previous) if previous is not None else math.inf
            raise AccuracyError("angular refinement did not converge", total, diff)
        previous = total
        n *= 2


@checked
def quad_frac_laplacian(
    u: Callable, x: np.ndarray, alpha: float, spec: QuadSpec | None = None
) -> float:
    """Reference value of (-Delta)^(alpha/2) u at ``x`` for d <= 3.

    ``u`` maps a single point of shape (d,) to a scalar and must vanish
    outside the unit ball.
    """
    return quad_frac_laplacian_with_error(u, x, alpha, spec).value


def quad_caputo_with_error(
    u_t: TimeSlice, t: float, gamma_order: float, spec: QuadSpec | None = None
) -> QuadResult:
    spec = spec or QuadSpec()
    if t <= 0.0:
        raise DomainError(f"Caputo reference needs t > 0, got {t}")
    if not 0.0 < gamma_order < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma_order}")
    h = spec.fd_step

    def derivative(s: float) -> float:
        if s < h:
            return (float(u_t(s + h)) - float(u_t(s))) / h
        return (float(u_t(s + h)) - float(u_t(s - h))) / (2.0 * h)

    res = _quad(derivative, 0.0, t, spec, weight="alg", wvar=(0.0, -gamma_order))
    scale = 1.0 / float(gamma(1.0 - gamma_order))
    return QuadResult(scale * res.value, scale * res.error)


@checked
def quad_caputo(u_t: Callable, t: float, gamma_order: float, spec: QuadSpec | None = None) -> float:
    """(1/Gamma(1-gamma)) int_0^t (t-s)^(-gamma) u'(s) ds with u' by central differences."""
    return quad_caputo_with_error(u_t, t, gamma_order, spec).value


@dataclass(frozen=True)
class RadialForcingTable:
    """Quadrature-built (-Delta)^(alpha/2) of a radial profile, interpolated in |x|^2.

    Used as the forcing source when no closed form exists.
    """

    d: int
    alpha: float
    spline: CubicSpline
    rho2_max: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.spline(np.clip(np.sum(x * x, axis=-1), 0.0, self.rho2_max))


def build_radial_table(
    profile: Callable[[np.ndarray], np.ndarray | float],
    d: int,
    alpha: float,
    n_radii: int = 33,
    spec: QuadSpec | None = None,
    rho2_max: float = 0.98,
) -> RadialForcingTable:
    """Tabulate the fractional Laplacian of a radial field on |x|^2 in [0, rho2_max].

    Points further out take the value at ``rho2_max``; a profile with a kink at
    the unit sphere has an unbounded fractional Laplacian there once alpha >= 1.
    """
    if d > MAX_ORACLE_DIM:
        raise ContractViolation(f"quadrature oracle supports d <= {MAX_ORACLE_DIM}, got {d}")
    if not 0.0 < rho2_max <= 1.0:
        raise DomainError(f"rho2_max must lie in (0, 1], got {rho2_max}")
    rho2 = np.linspace(0.0, rho2_max, n_radii)
    values = []
    for s in rho2:
        point = np.zeros(d)
        point[0] = math.sqrt(s)
        values.append(quad_frac_laplacian(profile, point, alpha, spec))
    logger.debug("built radial forcing table: d=%d alpha=%s nodes=%d", d, alpha, n_radii)
    return RadialForcingTable(
        d=d, alpha=alpha, spline=CubicSpline(rho2, np.asarray(values)), rho2_max=rho2_max
    )
