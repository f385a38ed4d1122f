"""
Airy function Ai and its derivative on the real line.

Maclaurin series on [SERIES_LEFT, SERIES_RIGHT], asymptotic expansions
outside, with a smooth hand-over across BLEND on either side so that Ai stays
differentiable to working precision. Each expansion keeps a fixed number of
terms, the count at which it is smallest on the series boundary. Absolute
error stays below 1e-10 on the supported range [X_MIN, X_MAX].

The exponentially scaled variants ``ai_scaled`` / ``ai_prime_scaled`` return
``Ai(x) * exp(2/3 x^(3/2))`` for x > 0 (unscaled for x <= 0) and accept any
finite x, so callers can combine the Airy decay with their own exponential
weights without underflow.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ValidationError


logger = logging.getLogger(__name__)

X_MIN = -30.0
X_MAX = 30.0

# The oscillatory expansion only reaches 1e-10 beyond |x| ~ 6.5; the
# exponential one already does at x = 5.
SERIES_LEFT = -6.5
SERIES_RIGHT = 5.0
BLEND = 0.5

AI_0 = 0.355028053887817239260          # 3^(-2/3) / Gamma(2/3)
AI_PRIME_0 = -0.258819403792806798405   # -3^(-1/3) / Gamma(1/3)
_AI_0_EXTENDED = np.longdouble('0.355028053887817239260')
_AI_PRIME_0_EXTENDED = np.longdouble('-0.258819403792806798405')

_SERIES_TERMS = 80
_ASYMPTOTIC_TERMS = 60
_SQRT_PI = math.sqrt(math.pi)


def _asymptotic_coefficients(count):
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k))
    v = [-(6 * k + 1) / (6 * k - 1) * uk for k, uk in enumerate(u)]
    return np.array(u), np.array(v)


_U, _V = _asymptotic_coefficients(_ASYMPTOTIC_TERMS)
_K = np.arange(_ASYMPTOTIC_TERMS)
_ALTERNATING = (-1.0) ** _K
_PAIRWISE_ALTERNATING = (-1.0) ** (_K // 2)
_EVEN = _K % 2 == 0


def _term_count(x):
    """Number of asymptotic terms up to and including the smallest one at ``x``."""
    zeta = 2.0 / 3.0 * abs(x) ** 1.5
    return int(np.argmin(np.abs(_U) / zeta ** _K.astype(float))) + 1


_LEFT_TERMS = _term_count(SERIES_LEFT)
_RIGHT_TERMS = _term_count(SERIES_RIGHT)


@dataclass(frozen=True)
class AiryValue:
    x: float
    ai: float
    ai_prime: float


def _zeta(x):
    return 2.0 / 3.0 * np.abs(x) ** 1.5


def _series(x):
    """
    Ai, Ai' from the two Maclaurin series f, g with Ai = Ai(0) f + Ai'(0) g.

    Summed in extended precision: left of zero the alternating terms grow to
    about 1e4 times the result.
    """
    x = np.asarray(x, dtype=np.longdouble)
    x3 = x ** 3
    f_term = np.ones_like(x)
    g_term = x.copy()
    fp_term = x * x / 2
    gp_term = np.ones_like(x)
    f, g, fp, gp = f_term.copy(), g_term.copy(), fp_term.copy(), gp_term.copy()
    for k in range(1, _SERIES_TERMS):
        f_term = f_term * x3 / ((3 * k - 1) * (3 * k))
        g_term = g_term * x3 / ((3 * k) * (3 * k + 1))
        gp_term = gp_term * x3 / ((3 * k) * (3 * k - 2))
        f += f_term
        g += g_term
        gp += gp_term
        if k >= 2:
            fp_term = fp_term * x3 / ((3 * k - 1) * (3 * k - 3))
            fp += fp_term
        largest = max(np.max(np.abs(f_term)), np.max(np.abs(g_term)),
                      np.max(np.abs(fp_term)), np.max(np.abs(gp_term)))
        if largest < 1e-22:
            break
    values = _AI_0_EXTENDED * f + _AI_PRIME_0_EXTENDED * g
    derivatives = _AI_0_EXTENDED * fp + _AI_PRIME_0_EXTENDED * gp
    return values.astype(float), derivatives.astype(float)


def _truncated_terms(zeta, count):
    """Terms u_k / zeta^k and v_k / zeta^k for k < ``count``."""
    powers = zeta[:, None] ** -_K[None, :count].astype(float)
    return _U[None, :count] * powers, _V[None, :count] * powers


def _right_tail(x):
    """Scaled Ai, Ai' for large positive x."""
    zeta = _zeta(x)
    tu, tv = _truncated_terms(zeta, _RIGHT_TERMS)
    su = tu @ _ALTERNATING[:_RIGHT_TERMS]
    sv = tv @ _ALTERNATING[:_RIGHT_TERMS]
    quarter = x ** 0.25
    return su / (2.0 * _SQRT_PI * quarter), -quarter * sv / (2.0 * _SQRT_PI)


def _left_tail(x):
    """Ai, Ai' for large negative x (oscillatory regime)."""
    z = -x
    zeta = _zeta(z)
    tu, tv = _truncated_terms(zeta, _LEFT_TERMS)
    signs = _PAIRWISE_ALTERNATING[:_LEFT_TERMS]
    even = np.where(_EVEN[:_LEFT_TERMS], signs, 0.0)
    odd = np.where(_EVEN[:_LEFT_TERMS], 0.0, signs)
    pu, qu = tu @ even, tu @ odd
    pv, qv = tv @ even, tv @ odd
    theta = zeta - math.pi / 4.0
    cos, sin = np.cos(theta), np.sin(theta)
    quarter = z ** 0.25
    ai = (cos * pu + sin * qu) / (_SQRT_PI * quarter)
    ai_prime = quarter * (sin * pv - cos * qv) / _SQRT_PI
    return ai, ai_prime


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


def series_weight(x):
    """Share of the Maclaurin series in Ai(x): 1 on [SERIES_LEFT, SERIES_RIGHT], 0 beyond BLEND."""
    x = np.asarray(x, dtype=float)
    return _smoothstep((x - SERIES_LEFT + BLEND) / BLEND) * _smoothstep((SERIES_RIGHT + BLEND - x) / BLEND)


def _evaluate(x, scaled):
    ai = np.zeros_like(x)
    ai_prime = np.zeros_like(x)
    weight = series_weight(x)

    series = weight > 0.0
    if series.any():
        values, derivatives = _series(x[series])
        if scaled:
            factor = np.exp(_zeta(np.maximum(x[series], 0.0)))
            values, derivatives = values * factor, derivatives * factor
        ai[series] += weight[series] * values
        ai_prime[series] += weight[series] * derivatives

    right = x > SERIES_RIGHT
    if right.any():
        values, derivatives = _right_tail(x[right])
        if not scaled:
            factor = np.exp(-_zeta(x[right]))
            values, derivatives = values * factor, derivatives * factor
        ai[right] += (1.0 - weight[right]) * values
        ai_prime[right] += (1.0 - weight[right]) * derivatives

    left = x < SERIES_LEFT
    if left.any():
        values, derivatives = _left_tail(x[left])
        ai[left] += (1.0 - weight[left]) * values
        ai_prime[left] += (1.0 - weight[left]) * derivatives

    return ai, ai_prime


def _prepare(x, lower, upper):
    array = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(array)):
        raise ValidationError("Airy argument must be finite")
    if np.any(array < lower) or np.any(array > upper):
        raise ValidationError(
            "Airy argument outside the supported range [%g, %g]: got [%g, %g]"
            % (lower, upper, array.min(), array.max()))
    return array


def _unpack(array, values):
    if array.ndim == 0:
        return tuple(float(v[0]) for v in values)
    return tuple(v.reshape(array.shape) for v in values)


def airy(x):
    """Return ``(Ai(x), Ai'(x))`` for scalar or array x in [X_MIN, X_MAX]."""
    array = _prepare(x, X_MIN, X_MAX)
    return _unpack(array, _evaluate(array.reshape(-1), scaled=False))


def airy_scaled(x):
    """Return ``(Ai(x), Ai'(x)) * exp(2/3 max(x, 0)^(3/2))`` for any finite x."""
    array = _prepare(x, -np.inf, np.inf)
    return _unpack(array, _evaluate(array.reshape(-1), scaled=True))


def ai(x):
    return airy(x)[0]


def ai_prime(x):
    return airy(x)[1]


def ai_scaled(x):
    return airy_scaled(x)[0]


def ai_prime_scaled(x):
    return airy_scaled(x)[1]


def ai_unbounded(x):
    """Ai(x) for any finite x; underflows quietly to zero far to the right."""
    array = np.asarray(x, dtype=float)
    scaled = ai_scaled(array)
    return scaled * np.exp(-_zeta(np.maximum(array, 0.0)))


def evaluate(x):
    value, derivative = airy(float(x))
    return AiryValue(x=float(x), ai=value, ai_prime=derivative)
