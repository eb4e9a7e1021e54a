"""Gamma-family functions and the Gauss hypergeometric function F(a,b;c;z).

``hyp2f1`` works on real arguments with z in [0, 1]. It routes between
three evaluation paths:

* the Maclaurin series in z (used for z <= 0.5, and for larger z when the
  parameters are big enough that the series is the cheaper stable option),
* the Euler transformation followed by the Gauss connection formulas in
  1 - z (including the logarithmic integer cases), for z near 1,
* the Euler integral via a Gauss-Jacobi rule (``method="euler"``), used as
  an independent cross-check when c > b > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

__all__ = [
    "DomainError",
    "DivergenceError",
    "HypArgs",
    "ln_gamma",
    "gamma_ratio",
    "beta_fn",
    "pochhammer",
    "hyp2f1",
    "hyp2f1_series",
    "hyp2f1_euler",
    "contiguous_residuals",
]

_EPS = 2.0 ** -53
_SERIES_MAX_TERMS = 1_000_000
# Connection formulas are used once max|param| * (1 - z) drops below this.
_CONNECTION_SCALE = 5.0
_INTEGER_TOL = 1e-12


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class DivergenceError(ArithmeticError):
    """The requested value does not exist (divergent series or integral)."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def _gamma_sign(x: float) -> int:
    if x > 0:
        return 1
    return -1 if math.ceil(-x) % 2 else 1


def gamma_ratio(num: tuple[float, ...], den: tuple[float, ...]) -> float:
    """prod Gamma(num) / prod Gamma(den), evaluated in log space.

    A pole in the denominator gives 0; a pole in the numerator raises.
    """
    for x in den:
        if _is_nonpositive_integer(x):
            return 0.0
    log_value = 0.0
    sign = 1
    for x in num:
        if _is_nonpositive_integer(x):
            raise DivergenceError(f"Gamma pole at {x!r} in numerator")
        log_value += math.lgamma(x)
        sign *= _gamma_sign(x)
    for x in den:
        log_value -= math.lgamma(x)
        sign *= _gamma_sign(x)
    return sign * math.exp(log_value)


def beta_fn(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_fn requires positive arguments, got ({a!r}, {b!r})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def pochhammer(a: float, k: int) -> float:
    """Rising factorial (a)_k."""
    if k < 0 or int(k) != k:
        raise DomainError(f"pochhammer requires a nonnegative integer k, got {k!r}")
    out = 1.0
    for j in range(int(k)):
        out *= a + j
    return out


@dataclass(frozen=True)
class HypArgs:
    """Validated argument tuple for F(a,b;c;z)."""

    a: float
    b: float
    c: float
    z: float

    def __post_init__(self) -> None:
        if _is_nonpositive_integer(self.c):
            raise DomainError(f"c must not be 0 or a negative integer, got {self.c!r}")
        if not 0.0 <= self.z <= 1.0:
            raise DomainError(f"z must lie in [0, 1], got {self.z!r}")
        if self.z == 1.0 and not self.c - self.a - self.b > 0:
            raise DivergenceError("F(a,b;c;1) diverges unless c - a - b > 0")

    def evaluate(self, method: str = "auto") -> float:
        return float(hyp2f1(self.a, self.b, self.c, self.z, method=method))


def hyp2f1_series(a: float, b: float, c: float, z, max_terms: int = _SERIES_MAX_TERMS):
    """Maclaurin series of F(a,b;c;z), vectorized over z (|z| < 1)."""
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    if z.size == 0:
        return total
    # Past k0 the term ratio (a+k)(b+k)/((c+k)(k+1)) stays close to 1.
    k0 = int(max(abs(a), abs(b), abs(c))) + 2
    tail = 1.0 / np.maximum(1.0 - np.abs(z), 1e-300)
    for k in range(max_terms):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
        if not np.any(term):
            return total
        if k >= k0 and np.all(np.abs(term) * tail <= _EPS * np.abs(total)):
            return total
    raise DivergenceError(f"series for F({a},{b};{c};z) did not converge in {max_terms} terms")


def _polynomial(a: float, b: float, c: float, z: np.ndarray) -> np.ndarray:
    degree = int(-min(x for x in (a, b) if _is_nonpositive_integer(x)))
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(degree):
        term = term * ((a + k) * (b + k) / ((c + k) * (k + 1.0))) * z
        total = total + term
    return total


def _log_case(a: float, b: float, c: float, w: np.ndarray, m: int) -> np.ndarray:
    """Connection formula for integer m = c - a - b >= 0 (logarithmic case)."""
    logw = np.log(w)
    out = np.zeros_like(w)
    if m > 0:
        pref = gamma_ratio((float(m), c), (a + m, b + m))
        if pref != 0.0:
            term = np.ones_like(w)
            finite = np.ones_like(w)
            for k in range(1, m):
                term = term * ((a + k - 1) * (b + k - 1) / (k * (k - m))) * w
                finite = finite + term
            out = out + pref * finite
    g = gamma_ratio((c,), (a, b))
    if g == 0.0:
        return out
    # sum_k (a+m)_k (b+m)_k / (k! (k+m)!) w^k [log w - psi(k+1) - psi(k+m+1) + psi(a+k+m) + psi(b+k+m)]
    coef = np.full_like(w, 1.0 / math.factorial(m))
    total = coef * (logw - digamma(1.0) - digamma(m + 1.0) + digamma(a + m) + digamma(b + m))
    k0 = int(max(abs(a), abs(b))) + m + 2
    for k in range(1, _SERIES_MAX_TERMS):
        coef = coef * ((a + m + k - 1) * (b + m + k - 1) / (k * (k + m))) * w
        step = coef * (logw - digamma(k + 1.0) - digamma(k + m + 1.0)
                       + digamma(a + k + m) + digamma(b + k + m))
        total = total + step
        if k >= k0 and np.all(np.abs(step) * 2.0 <= _EPS * np.maximum(np.abs(total), 1e-300)):
            break
    sign = -1.0 if m % 2 else 1.0
    return out - sign * g * w ** m * total


def _connection(a: float, b: float, c: float, z: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """F(a,b;c;z) for z in (0.5, 1) through the 1 - z connection formulas.

    ``w`` optionally supplies 1 - z exactly, for z too close to 1 to carry it.
    """
    if w is None:
        w = 1.0 - z
    m = c - a - b
    if m < 0:
        # Euler transformation: F(a,b;c;z) = (1-z)^{c-a-b} F(c-a,c-b;c;z)
        return w ** m * hyp2f1(c - a, c - b, c, z, method="connection", complement=w)
    mi = round(m)
    if abs(m - mi) <= _INTEGER_TOL:
        return _log_case(a, b, c, w, int(mi))
    if abs(m - mi) < 1e-4:
        # Near-integer m: the two connection terms cancel catastrophically.
        return hyp2f1_series(a, b, c, z)
    g1 = gamma_ratio((c, m), (c - a, c - b))
    g2 = gamma_ratio((c, -m), (a, b))
    out = np.zeros_like(z)
    if g1 != 0.0:
        out = out + g1 * hyp2f1_series(a, b, 1.0 - m, w)
    if g2 != 0.0:
        out = out + g2 * w ** m * hyp2f1_series(c - a, c - b, 1.0 + m, w)
    return out


def hyp2f1_euler(a: float, b: float, c: float, z, m: int = 96):
    """Euler integral representation evaluated with a Gauss-Jacobi rule.

    F = B(b, c-b)^{-1} int_0^1 t^{b-1} (1-t)^{c-b-1} (1-zt)^{-a} dt, c > b > 0.
    """
    if not c > b > 0:
        raise DomainError("Euler integral requires c > b > 0")
    from .quadrature import gauss_jacobi

    rule = gauss_jacobi(m, c - b - 1.0, b - 1.0)
    z = np.asarray(z, dtype=float)
    t = rule.nodes
    vals = (1.0 - np.multiply.outer(z, t)) ** (-a)
    return vals @ rule.weights / beta_fn(b, c - b)


def hyp2f1(a: float, b: float, c: float, z, method: str = "auto", complement=None):
    """Gauss hypergeometric function F(a,b;c;z) for real z in [0, 1].

    ``z`` may be a scalar or an array; the result has the same shape.
    ``method`` is one of "auto", "series", "connection", "euler".
    ``complement`` optionally gives 1 - z without rounding; the connection
    formulas then use it, which matters when 1 - z is below machine epsilon.
    """
    a, b, c = float(a), float(b), float(c)
    if _is_nonpositive_integer(c):
        raise DomainError(f"c must not be 0 or a negative integer, got {c!r}")
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any((zz < 0.0) | (zz > 1.0)) or np.any(np.isnan(zz)):
        raise DomainError("z must lie in [0, 1]")
    if method == "euler":
        out = hyp2f1_euler(a, b, c, zz)
        return float(out[0]) if scalar else out
    if complement is None:
        ww = 1.0 - zz
    else:
        ww = np.broadcast_to(np.atleast_1d(np.asarray(complement, dtype=float)), zz.shape).copy()
        if np.any(ww < 0.0):
            raise DomainError("complement 1 - z must be nonnegative")
    out = np.empty_like(zz)
    if a == 0.0 or b == 0.0:
        out[:] = 1.0
        return float(out[0]) if scalar else out
    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    at_one = ww == 0.0
    if np.any(at_one):
        if terminating:
            out[at_one] = _polynomial(a, b, c, zz[at_one])
        elif c - a - b > 0:
            out[at_one] = gamma_ratio((c, c - a - b), (c - a, c - b))
        else:
            raise DivergenceError("F(a,b;c;1) diverges unless c - a - b > 0")
    rest = ~at_one
    zr = zz[rest]
    wr = ww[rest]
    if terminating:
        out[rest] = _polynomial(a, b, c, zr)
    elif method == "series":
        out[rest] = hyp2f1_series(a, b, c, zr)
    elif method == "connection":
        out[rest] = _connection(a, b, c, zr, wr)
    elif method == "auto":
        big = max(abs(a), abs(b), abs(c), 1.0)
        use_conn = (zr > 0.5) & (big * wr <= _CONNECTION_SCALE)
        res = np.empty_like(zr)
        if np.any(~use_conn):
            res[~use_conn] = hyp2f1_series(a, b, c, zr[~use_conn])
        if np.any(use_conn):
            res[use_conn] = _connection(a, b, c, zr[use_conn], wr[use_conn])
        out[rest] = res
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if scalar else out


def contiguous_residuals(a: float, b: float, c: float, z: float) -> tuple[float, float, float]:
    """Absolute residuals of Euler's transformation and two Gauss relations."""
    f = lambda aa, bb, cc: hyp2f1(aa, bb, cc, z)  # noqa: E731
    base = f(a, b, c)
    r_euler = abs(base - (1.0 - z) ** (c - a - b) * f(c - a, c - b, c))
    r_shift = abs(f(a + 1, b, c) - base - (b / c) * z * f(a + 1, b + 1, c + 1))
    r_split = abs(base - (b / c) * f(a, b + 1, c + 1) - ((c - b) / c) * f(a, b, c + 1))
    return r_euler, r_shift, r_split
