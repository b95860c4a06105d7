"""Special functions: exponential integral E1 and the regularized incomplete beta.

Both are evaluated with a power series on one side of their domain and a
continued fraction (modified Lentz) on the other.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_TINY = 1e-300
_EPS = 1e-16


def _exp1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * (-x) / k
        total += term / k
    return -EULER_GAMMA - np.log(x) - total


def _exp1_cfrac(x, max_iter=500):
    b = x + 1.0
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_iter):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < _EPS):
            break
    return h * np.exp(-x)


def exp1(x):
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Accepts scalars or arrays; returns the same shape. Non-positive inputs
    give ``inf`` (x == 0) or ``nan`` (x < 0).
    """
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    neg = flat < 0
    zero = flat == 0
    small = (flat > 0) & (flat < 1.0)
    large = flat >= 1.0
    huge = flat > 700.0
    out[neg] = np.nan
    out[zero] = np.inf
    if small.any():
        out[small] = _exp1_series(flat[small])
    mid = large & ~huge
    if mid.any():
        out[mid] = _exp1_cfrac(flat[mid])
    out[huge] = 0.0
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def _betacf(a, b, x, max_iter=20000):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided(t, df):
    """Two-sided tail probability P(|T| >= |t|) for Student's t with ``df`` dof."""
    t = float(t)
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, betainc(0.5 * df, 0.5, x))


def normal_sf(z):
    """Upper tail of the standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))
