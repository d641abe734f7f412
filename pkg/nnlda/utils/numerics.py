"""
Special functions and probability kernels shared by every model.

All kernels take a scalar or a numpy array and work elementwise; scalar input
gives a Python float back. digamma shifts the argument upward until it is at
least 6 and lgamma until it is at least 10, then both evaluate their
asymptotic (Stirling) series. On [0.5, 2.5] lgamma uses the power series of
lgamma(2 + z) instead, which keeps full relative accuracy next to the zeros
at 1 and 2.
"""
import logging
from typing import Union

import numpy as np

from nnlda.errors import DomainError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

RECURRENCE_THRESHOLD = 6.0
LGAMMA_THRESHOLD = 10.0
SERIES_LOW = 0.5
SERIES_HIGH = 2.5
THETA_FLOOR = 1e-12
HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)
EULER_GAMMA = 0.5772156649015329

# Stirling series for lgamma: coefficients of x^-1, x^-3, ..., x^-13
_LGAMMA_SERIES = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)

# Asymptotic series for digamma: coefficients of x^-2, x^-4, ..., x^-14
_DIGAMMA_SERIES = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)

# Bernoulli numbers B_2, B_4, ..., B_14
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0)


def _zeta_minus_one(k: int, terms: int = 10) -> float:
    """zeta(k) - 1 for integer k >= 2: direct sum up to ``terms`` - 1, Euler-Maclaurin tail."""
    n = float(terms)
    total = sum(m ** -float(k) for m in range(2, terms))
    total += n ** (1.0 - k) / (k - 1.0) + 0.5 * n ** -float(k)
    rising = float(k)
    factorial = 2.0
    for j, bernoulli in enumerate(_BERNOULLI, start=1):
        total += bernoulli / factorial * rising * n ** (-k - 2.0 * j + 1.0)
        rising *= (k + 2.0 * j - 1.0) * (k + 2.0 * j)
        factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0)
    return total


# lgamma(2 + z) = (1 - gamma) z + sum_{k >= 2} (-1)^k (zeta(k) - 1) z^k / k, |z| < 2
_LGAMMA_TWO_SERIES = (1.0 - EULER_GAMMA,) + tuple(
    (-1.0) ** k * _zeta_minus_one(k) / k for k in range(2, 32)
)


def _as_positive(x: ArrayLike, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(arr > 0):
        raise DomainError(f"{name} requires a positive argument, got {x!r}")
    return arr


def _finish(result: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(np.asarray(result).reshape(-1)[0])
    return result


def _shift_up(z: np.ndarray, threshold: float = RECURRENCE_THRESHOLD):
    """Yield (mask, z) pairs while some entries are still below the threshold."""
    z = z.copy()
    mask = z < threshold
    while np.any(mask):
        yield mask, z
        z[mask] += 1.0
        mask = z < threshold
    yield None, z


def _lgamma_stirling(z: np.ndarray) -> np.ndarray:
    # log of z(z+1)...(z+n-1), accumulated as a product
    shift = np.ones_like(z)
    for mask, current in _shift_up(z, LGAMMA_THRESHOLD):
        if mask is None:
            z = current
            break
        shift[mask] *= current[mask]
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    for coeff in reversed(_LGAMMA_SERIES):
        series = series * inv2 + coeff
    series *= inv
    return (z - 0.5) * np.log(z) - z + HALF_LOG_2PI + series - np.log(shift)


def _lgamma_near_one_two(x: np.ndarray) -> np.ndarray:
    # x in [0.5, 2.5]; lgamma(1 + z) = lgamma(2 + z) - log1p(z)
    upper = x >= 1.5
    z = np.where(upper, x - 2.0, x - 1.0)
    series = np.zeros_like(z)
    for coeff in reversed(_LGAMMA_TWO_SERIES):
        series = series * z + coeff
    series *= z
    return np.where(upper, series, series - np.log1p(z))


def lgamma(x: ArrayLike) -> ArrayLike:
    """Natural log of the gamma function for x > 0."""
    z = np.atleast_1d(_as_positive(x, "lgamma"))
    result = np.empty_like(z)
    near = (z >= SERIES_LOW) & (z <= SERIES_HIGH)
    if np.any(near):
        result[near] = _lgamma_near_one_two(z[near])
    if not np.all(near):
        result[~near] = _lgamma_stirling(z[~near])
    return _finish(result, x)


def digamma(x: ArrayLike) -> ArrayLike:
    """Derivative of lgamma for x > 0."""
    z = np.atleast_1d(_as_positive(x, "digamma"))
    correction = np.zeros_like(z)
    for mask, current in _shift_up(z):
        if mask is None:
            z = current
            break
        correction[mask] -= 1.0 / current[mask]
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for coeff in reversed(_DIGAMMA_SERIES):
        series = series * inv2 + coeff
    series *= inv2
    result = np.log(z) - 0.5 / z + series + correction
    return _finish(result, x)


def dirichlet_expectation(eta: np.ndarray) -> np.ndarray:
    """E[log theta] under Dir(eta); row-wise for a matrix."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.ndim == 1:
        return digamma(eta) - digamma(np.sum(eta))
    return digamma(eta) - digamma(np.sum(eta, axis=1))[:, np.newaxis]


def dirichlet_log_pdf(theta: np.ndarray, alpha: np.ndarray) -> float:
    """
    Log density of Dir(alpha) at theta.

    Entries of theta in (0, 1e-12) are floored at 1e-12 before the log. An
    entry that is exactly zero sits on the simplex boundary: the density is
    +inf there when its alpha is below one and 0 (log -inf) when it is above one.
    """
    theta = np.asarray(theta, dtype=np.float64)
    alpha = _as_positive(alpha, "dirichlet_log_pdf alpha")
    if theta.shape != alpha.shape or theta.ndim != 1:
        raise ShapeError(f"theta shape {theta.shape} does not match alpha shape {alpha.shape}")
    if np.any(theta < 0) or abs(float(np.sum(theta)) - 1.0) > 1e-9:
        raise DomainError("theta must lie on the simplex")

    on_boundary = theta == 0.0
    if np.any(on_boundary & (alpha < 1.0)):
        logger.warning("Dirichlet density is non-finite: theta on the boundary with alpha < 1")
        return float("inf")
    if np.any(on_boundary & (alpha > 1.0)):
        return float("-inf")

    log_theta = np.log(np.maximum(theta, THETA_FLOOR))
    terms = np.where(on_boundary, 0.0, (alpha - 1.0) * log_theta)
    return float(lgamma(np.sum(alpha)) - np.sum(lgamma(alpha)) + np.sum(terms))


def log_sum_exp(xs: np.ndarray, axis: int = None) -> ArrayLike:
    """log(sum(exp(xs))) shifted by the max so large inputs do not overflow."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise DomainError("log_sum_exp of an empty input")
    shift = np.max(xs, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(shift), shift, 0.0)
    out = np.log(np.sum(np.exp(xs - shift), axis=axis, keepdims=True)) + shift
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def softplus(x: ArrayLike) -> ArrayLike:
    """log(1 + exp(x)) without overflow."""
    arr = np.asarray(x, dtype=np.float64)
    result = np.maximum(arr, 0.0) + np.log1p(np.exp(-np.abs(arr)))
    return _finish(result, x)


def softplus_inverse(y: ArrayLike) -> ArrayLike:
    """Inverse of softplus: log(exp(y) - 1) for y > 0."""
    arr = _as_positive(y, "softplus_inverse")
    result = arr + np.log(-np.expm1(-arr))
    return _finish(result, y)


def sigmoid(x: ArrayLike) -> ArrayLike:
    """Derivative of softplus."""
    arr = np.asarray(x, dtype=np.float64)
    result = np.exp(-softplus(-arr))
    return _finish(result, x)
