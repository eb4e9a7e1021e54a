"""Scalar constants: the sharp constant c, the spectral coefficients A_l, the
gap constant K^{-1}, d~, and the large-l decay of A_l.

With t = r^2 and the bounded profile phi_hat (see ``operators``),

    A_l = C^{q-2} int_0^1 (1-t)^{q eps} t^{n/2+l-1} phi_hat_0^{q-2} phi_hat_l^2 dt,

which is the defining integral of d^{q-2} (1-t)^{2(beta+alpha-1)} phi_l^2 after
the Euler transformation for alpha > 1. The weight is integrated by the graded
Jacobi rule, so every Gamma ratio enters through phi_hat in log space.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .operators import RADIAL_ORDER, _c_const, d_q_integral, phi_hat, radial_rule, tilde_d
from .params import Params, exponents
from .quadrature import ball_volume, sphere_area
from .specfun import gamma_ratio, hyp2f1

__all__ = [
    "exponents",
    "A_l",
    "A_table",
    "K_inv",
    "K_prefactor",
    "c_sharp",
    "mode_quantity",
    "ConstantSet",
    "constant_set",
    "GapMargins",
    "gap_check",
    "DecayFit",
    "decay_fit",
    "ALPHA_ONE_SLACK",
    "VALIDATION_PAIRS",
    "VALIDATION_GRID",
]

ALPHA_ONE_SLACK = 0.05

# (alpha, beta) pairs: alpha < 1, = 1, > 1, alpha <= 0, and both signs of alpha + beta - 1
VALIDATION_PAIRS = (
    (0.0, 1.0),
    (0.5, 0.6),
    (0.5, 0.3),
    (1.0, 0.5),
    (2.0, 0.2),
    (1.5, 0.0),
    (-0.3, 1.4),
    (-0.2, 1.1),
)
VALIDATION_GRID = tuple(Params(n, a, b) for n in (3, 4, 5) for a, b in VALIDATION_PAIRS)


@lru_cache(maxsize=4096)
def _A_cached(prm: Params, l: int, order: int) -> float:
    rule = radial_rule(prm, order, extra_power=float(l))
    t, comp = rule.nodes, rule.complement
    vals = phi_hat(prm, 0, t, comp) ** (prm.q - 2.0) * phi_hat(prm, l, t, comp) ** 2
    return _c_const(prm) ** (prm.q - 2.0) * float(rule.weights @ vals)


def A_l(prm: Params, l: int, order: int = RADIAL_ORDER) -> float:
    """Spectral coefficient A_l by the graded rule matched to (1-t)^{q eps} t^{n/2+l-1}."""
    if l < 0 or int(l) != l:
        raise ValueError(f"l must be a nonnegative integer, got {l!r}")
    val = _A_cached(prm.require_valid(), int(l), int(order))
    if not (math.isfinite(val) and val > 0.0):
        raise ArithmeticError(f"A_{l} is not finite and positive for {prm}")
    return val


def A_table(prm: Params, l_max: int, order: int = RADIAL_ORDER) -> np.ndarray:
    return np.array([A_l(prm, l, order) for l in range(l_max + 1)])


def K_prefactor(prm: Params) -> float:
    """pi^n 2^{1-2 beta} / Gamma((n-alpha)/2)^2."""
    n = prm.n
    return math.exp(n * math.log(math.pi) + (1.0 - 2.0 * prm.beta) * math.log(2.0) - 2.0 * math.lgamma((n - prm.alpha) / 2.0))


def K_inv(prm: Params, order: int = RADIAL_ORDER) -> float:
    return K_prefactor(prm) * A_l(prm, 2, order)


def c_sharp(prm: Params, order: int = RADIAL_ORDER) -> float:
    """|S^{n-1}|^{-1/p} ||d||_{L^q(B^n)}."""
    return sphere_area(prm.n) ** (-1.0 / prm.p) * d_q_integral(prm, order) ** (1.0 / prm.q)


def mode_quantity(prm: Params, l: int, t) -> np.ndarray:
    """Gamma(l+(n-alpha)/2)^2/Gamma(l+n/2)^2 F(l+(n+alpha)/2-1, alpha/2; l+n/2; t)^2, times t^l for alpha <= 0.

    Strictly decreasing in l at each t in (0, 1).
    """
    n, a = prm.n, prm.alpha
    t = np.asarray(t, dtype=float)
    g = gamma_ratio((l + (n - a) / 2.0,), (l + n / 2.0,))
    out = (g * hyp2f1(l + (n + a) / 2.0 - 1.0, a / 2.0, l + n / 2.0, t)) ** 2
    return out * t**l if a <= 0.0 else out


@dataclass(frozen=True)
class ConstantSet:
    params: Params
    c_sharp: float
    K_inv: float
    A: tuple[float, ...]
    d_q_integral: float
    tilde_d: float

    def record(self) -> dict:
        """Flat record in the column order n, alpha, beta, p, q, p_prime, q_prime, c_sharp, K_inv, A0.., tilde_d, d_q_integral."""
        prm = self.params
        out = {
            "n": prm.n,
            "alpha": prm.alpha,
            "beta": prm.beta,
            "p": prm.p,
            "q": prm.q,
            "p_prime": prm.p_prime,
            "q_prime": prm.q_prime,
            "c_sharp": self.c_sharp,
            "K_inv": self.K_inv,
        }
        out.update({f"A{l}": v for l, v in enumerate(self.A)})
        out["tilde_d"] = self.tilde_d
        out["d_q_integral"] = self.d_q_integral
        return out


def constant_set(prm: Params, l_max: int = 10, order: int = RADIAL_ORDER) -> ConstantSet:
    prm.require_valid()
    A = tuple(float(a) for a in A_table(prm, l_max, order))
    return ConstantSet(
        params=prm,
        c_sharp=c_sharp(prm, order),
        K_inv=K_prefactor(prm) * A[2] if l_max >= 2 else K_inv(prm, order),
        A=A,
        d_q_integral=d_q_integral(prm, order),
        tilde_d=tilde_d(prm, order),
    )


@dataclass(frozen=True)
class GapMargins:
    """K^{-1} against (p-1)/(q-1) int_B d^q / |S^{n-1}|, and the same bound with A_1 in place of A_2."""

    K_inv: float
    rhs: float
    margin: float
    A1_lhs: float
    A1_margin: float
    A2_below_A1: bool

    def as_dict(self) -> dict:
        return asdict(self)


def gap_check(prm: Params, order: int = RADIAL_ORDER) -> GapMargins:
    prm.require_valid()
    rhs = (prm.p - 1.0) / (prm.q - 1.0) * d_q_integral(prm, order) / sphere_area(prm.n)
    a1, a2 = A_l(prm, 1, order), A_l(prm, 2, order)
    k = K_prefactor(prm)
    return GapMargins(k * a2, rhs, rhs - k * a2, k * a1, rhs - k * a1, a2 < a1)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    target: float
    l_range: tuple[int, int]
    log_power: float

    @property
    def deviation(self) -> float:
        return self.slope - self.target


def decay_fit(prm: Params, l_max: int = 200, order: int = RADIAL_ORDER) -> DecayFit:
    """Least-squares slope of log A_l against log l on [l_max/2, l_max].

    Target: -(1 + q(alpha+beta-1)) for alpha < 1 and -(1 + q beta) for
    alpha > 1. At alpha = 1 the target carries the slack +0.05 and log A_l
    is first corrected by (q-2) log log l, the logarithmic factor of d^{q-2}
    (d grows like (1-t)^beta |log(1-t)| there).
    """
    if l_max < 50:
        raise ValueError("decay fits need l_max >= 50")
    prm.require_valid()
    ls = np.arange(l_max // 2, l_max + 1)
    logs = np.log(np.array([A_l(prm, int(l), order) for l in ls]))
    log_power = 0.0
    if prm.regime == "lt1":
        target = -(1.0 + prm.q * (prm.alpha + prm.beta - 1.0))
    elif prm.regime == "gt1":
        target = -(1.0 + prm.q * prm.beta)
    else:
        target = -(1.0 + prm.q * prm.beta) + ALPHA_ONE_SLACK
        log_power = prm.q - 2.0
        logs = logs - log_power * np.log(np.log(ls))
    slope = float(np.polyfit(np.log(ls), logs, 1)[0])
    return DecayFit(slope, target, (int(ls[0]), int(ls[-1])), log_power)


def harmonic_pair_closed_forms(n: int) -> dict:
    """Closed forms at (alpha, beta) = (0, 1) for dimension n."""
    prm = Params(n, 0.0, 1.0)
    area = sphere_area(n)
    d = area / 2.0
    c = 0.5 * n ** (-(n - 2) / (2.0 * n)) * area ** (1.0 - (n - 2) / (2.0 * n * (n - 1)))
    return {
        "d": d,
        "c_sharp": c,
        "K_inv": area**2 * d ** (prm.q - 2.0) / (4.0 * (n + 4)),
        "A": lambda l: 2.0 * d ** (prm.q - 2.0) / (n + 2 * l),
        "d_q_integral": d**prm.q * ball_volume(n),
    }
