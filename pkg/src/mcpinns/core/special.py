"""Special functions and fractional-operator constants.

Gamma is evaluated with the Lanczos approximation (g = 7, nine coefficients)
plus the reflection formula below 1/2; everything else is built on top of it.
"""

import math
from dataclasses import dataclass

import numpy as np

from mcpinns._typing import checked
from mcpinns.errors import DomainError

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Beyond this argument Gamma overflows a double.
_GAMMA_OVERFLOW = 171.6


def _lanczos_series(z: np.ndarray) -> np.ndarray:
    """Lanczos partial-fraction sum for Gamma(z + 1), z >= -0.5."""
    acc = np.full_like(z, _LANCZOS_COEFFS[0])
    for i, coeff in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc = acc + coeff / (z + i)
    return acc


def _gamma_right(x: np.ndarray) -> np.ndarray:
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # Split the power so t**(z + 0.5) does not overflow before exp(-t) scales it.
    half = t ** ((z + 0.5) / 2.0)
    return _SQRT_TWO_PI * half * (half * np.exp(-t)) * _lanczos_series(z)


def _is_pole(x: np.ndarray) -> np.ndarray:
    return (x <= 0.0) & (x == np.floor(x))


def gamma(x: float | np.ndarray) -> float | np.ndarray:
    """Gamma function for real arguments away from the poles 0, -1, -2, ...

    Works elementwise on arrays. Raises DomainError if any element is a pole.
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(_is_pole(arr)):
        raise DomainError(f"gamma has a pole at {x!r}")

    out = np.empty_like(arr)
    right = arr >= 0.5
    if np.any(right):
        out[right] = _gamma_right(arr[right])
    left = ~right
    if np.any(left):
        xl = arr[left]
        out[left] = math.pi / (np.sin(math.pi * xl) * _gamma_right(1.0 - xl))

    if np.ndim(x) == 0:
        return float(out)
    return out


def log_abs_gamma(x: float) -> float:
    """log|Gamma(x)| for scalar x, usable where Gamma itself overflows."""
    if _is_pole(np.asarray(x)):
        raise DomainError(f"gamma has a pole at {x!r}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - log_abs_gamma(1.0 - x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    series = float(_lanczos_series(np.asarray([z]))[0])
    return _HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(series)


def _reciprocal_gamma(x: float) -> float:
    if _is_pole(np.asarray(x)):
        return 0.0
    if x < _GAMMA_OVERFLOW:
        return 1.0 / float(gamma(x))
    return math.exp(-log_abs_gamma(x))


_ML_TAIL_TOL = 1e-15
_ML_TAIL_RUN = 20
_ML_MAX_TERMS = 20_000
_ML_MAX_ARG = 50.0


def _mittag_leffler_scalar(a: float, b: float, t: float) -> float:
    if t == 0.0:
        return _reciprocal_gamma(b)

    total = 0.0
    small_run = 0
    log_abs_t = math.log(abs(t))
    negative = t < 0.0
    for k in range(_ML_MAX_TERMS):
        arg = a * k + b
        if _is_pole(np.asarray(arg)):
            term = 0.0
        elif arg < _GAMMA_OVERFLOW and k * log_abs_t < 700.0:
            term = t**k / float(gamma(arg))
        else:
            magnitude = math.exp(k * log_abs_t - log_abs_gamma(arg))
            sign = -1.0 if (negative and k % 2 == 1) else 1.0
            if arg < 0.0 and math.floor(-arg) % 2 == 0:
                sign = -sign
            term = sign * magnitude
        total += term
        if abs(term) < _ML_TAIL_TOL:
            small_run += 1
            if small_run >= _ML_TAIL_RUN:
                return total
        else:
            small_run = 0

    raise DomainError(
        f"Mittag-Leffler series did not settle for a={a}, b={b}, t={t}"
    )


def mittag_leffler(a: float, b: float, t: float | np.ndarray) -> float | np.ndarray:
    """Two-parameter Mittag-Leffler function E_{a,b}(t) by direct summation.

    Only the series regime |t| <= 50 is supported. Arrays of t are evaluated
    elementwise.
    """
    if a <= 0.0:
        raise DomainError(f"Mittag-Leffler series requires a > 0, got a={a}")
    arr = np.asarray(t, dtype=np.float64)
    if np.any(np.abs(arr) > _ML_MAX_ARG):
        raise DomainError(
            f"Mittag-Leffler supports |t| <= {_ML_MAX_ARG}, got max |t|={np.max(np.abs(arr))}"
        )
    if arr.ndim == 0:
        return _mittag_leffler_scalar(float(a), float(b), float(arr))
    flat = [_mittag_leffler_scalar(float(a), float(b), float(v)) for v in arr.ravel()]
    return np.asarray(flat, dtype=np.float64).reshape(arr.shape)


@dataclass(frozen=True)
class FracConstants:
    """Constants of the integral fractional Laplacian in dimension d."""

    d: int
    alpha: float
    c_d_alpha: float
    sphere_area: float


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / float(gamma(d / 2.0))


@checked
def frac_constants(d: int, alpha: float) -> FracConstants:
    """Normalising constant C_{d,alpha} and |S^{d-1}| for 0 < alpha < 2."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    c = (
        2.0**alpha
        * float(gamma((alpha + d) / 2.0))
        / (math.pi ** (d / 2.0) * abs(float(gamma(-alpha / 2.0))))
    )
    return FracConstants(d=d, alpha=float(alpha), c_d_alpha=c, sphere_area=sphere_area(d))
