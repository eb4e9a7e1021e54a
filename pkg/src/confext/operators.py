"""The kernel H, the extension operator Q, its adjoint S, the half-space
extension E, and the radial special functions d, phi_l, w_l.

Radial profiles are handled in t = r^2 and factored as

    w_l(r) = C (1 - t)^eps r^l phi_hat_l(t),   C = 2^{1-beta} pi^{n/2} / Gamma((n-alpha)/2),

with eps = beta + alpha - 1 for alpha <= 1 and eps = beta for alpha > 1.
phi_hat_l equals phi_l for alpha <= 1 and is the Euler-transformed
(1-t)^{alpha-1} phi_l for alpha > 1, so it is bounded at t = 1 except for a
logarithm at alpha = 1. Every ball integral below then behaves like
(1-t)^{q eps} at the boundary, which is the Jacobi weight used throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .harmonics import HarmonicExpansion, basis, gegenbauer, n_harmonics
from .params import Params
from .quadrature import (
    BallRule,
    QuadratureRule,
    aligned_sphere_rule,
    ball_rule,
    gauss_legendre,
    graded_jacobi,
    sphere_area,
    sphere_rule,
)
from .specfun import DomainError, gamma_ratio, hyp2f1

__all__ = [
    "kernel_H",
    "d_closed",
    "phi_l",
    "phi_hat",
    "w_l_closed",
    "w_l_funk_hecke",
    "radial_rule",
    "matched_ball_rule",
    "BallField",
    "apply_Q",
    "evaluate_Q",
    "apply_Q_quadrature",
    "apply_S",
    "d_q_integral",
    "tilde_one",
    "tilde_d",
    "tilde_one_field",
    "extension_E",
    "boundary_limit_check",
    "BoundaryLimit",
    "UnsupportedCase",
    "QuadratureFailure",
]


class UnsupportedCase(DomainError):
    """A parameter regime the routine deliberately does not cover."""


class QuadratureFailure(ArithmeticError):
    """A radial integral did not produce a finite value."""


def _c_const(prm: Params) -> float:
    return 2.0 ** (1.0 - prm.beta) * math.pi ** (prm.n / 2.0) / math.gamma((prm.n - prm.alpha) / 2.0)


def kernel_H(prm: Params, xi, eta) -> np.ndarray:
    """H(xi, eta) = ((1-|xi|^2)/2)^beta |xi - eta|^{alpha-n}; broadcasts over leading axes."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    s = np.sum(xi * xi, axis=-1)
    if np.any(s >= 1.0):
        raise DomainError("H is singular for xi on or outside the unit sphere")
    dist2 = np.sum((xi - eta) ** 2, axis=-1)
    return ((1.0 - s) / 2.0) ** prm.beta * dist2 ** ((prm.alpha - prm.n) / 2.0)


def _mode_params(prm: Params, l: int) -> tuple[float, float, float]:
    n, a = prm.n, prm.alpha
    return l + (n + a) / 2.0 - 1.0, a / 2.0, l + n / 2.0


def phi_l(prm: Params, l: int, t) -> np.ndarray | float:
    """phi_l(t) = Gamma(l+(n-alpha)/2)/Gamma(l+n/2) F(l+(n+alpha)/2-1, alpha/2; l+n/2; t)."""
    a, b, c = _mode_params(prm, l)
    if np.any(np.asarray(t) >= 1.0) and prm.alpha >= 1.0:
        raise DomainError("phi_l diverges at t = 1 for alpha >= 1")
    g = gamma_ratio((l + (prm.n - prm.alpha) / 2.0,), (l + prm.n / 2.0,))
    return g * hyp2f1(a, b, c, t)


def phi_hat(prm: Params, l: int, t, comp=None) -> np.ndarray | float:
    """phi_l(t) (1-t)^{max(alpha-1, 0)}, bounded at t = 1 for alpha != 1.

    ``comp`` optionally carries 1 - t exactly.
    """
    a, b, c = _mode_params(prm, l)
    g = gamma_ratio((l + (prm.n - prm.alpha) / 2.0,), (l + prm.n / 2.0,))
    if prm.alpha > 1.0:
        return g * hyp2f1(c - a, c - b, c, t, complement=comp)
    return g * hyp2f1(a, b, c, t, complement=comp)


def _w_from_t(prm: Params, l: int, t: np.ndarray, comp: np.ndarray) -> np.ndarray:
    """w_l at r = sqrt(t) given t and 1 - t (the latter without cancellation)."""
    return _c_const(prm) * comp ** prm.radial_power * t ** (l / 2.0) * phi_hat(prm, l, t, comp)


def w_l_closed(prm: Params, l: int, r) -> np.ndarray | float:
    """Funk-Hecke radial eigenprofile of S (equivalently the degree-l radial factor of Q)."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr >= 1.0) or np.any(rr < 0.0):
        raise DomainError("w_l needs 0 <= r < 1")
    t = rr * rr
    out = _w_from_t(prm, l, np.atleast_1d(t), np.atleast_1d(1.0 - t))
    return float(out[0]) if np.ndim(r) == 0 else out.reshape(rr.shape)


def d_closed(prm: Params, r) -> np.ndarray | float:
    """d(r) = pi^{n/2} 2^{1-beta}/Gamma(n/2) (1-r^2)^{beta+alpha-1} F((n+alpha)/2-1, alpha/2; n/2; r^2)."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr >= 1.0) or np.any(rr < 0.0):
        raise DomainError("d needs 0 <= r < 1")
    t = rr * rr
    n, a, b = prm.n, prm.alpha, prm.beta
    pref = math.pi ** (n / 2.0) * 2.0 ** (1.0 - b) / math.gamma(n / 2.0)
    out = pref * (1.0 - t) ** (b + a - 1.0) * hyp2f1((n + a) / 2.0 - 1.0, a / 2.0, n / 2.0, t)
    return float(out) if np.ndim(r) == 0 else out


def w_l_funk_hecke(prm: Params, l: int, r: float, rtol: float = 1e-11) -> float:
    """w_l(r) as the Funk-Hecke eigenvalue of the kernel profile at radius r.

    Independent of the hypergeometric closed form: adaptive quadrature of
    int_{-1}^{1} K(t) C_l(t) (1-t^2)^{(n-3)/2} dt after s = 1 - t, split at
    the scale (1-r)^2 of the near singularity at t = 1.
    """
    n = prm.n
    lam = (n - 2) / 2.0
    pref = (4.0 * math.pi) ** lam * math.exp(math.lgamma(lam) + math.lgamma(l + 1.0) - math.lgamma(l + n - 2.0))
    scale = ((1.0 - r) * (1.0 + r) / 2.0) ** prm.beta
    gap2 = (1.0 - r) ** 2

    def integrand(s):
        # |r e - eta|^2 = (1-r)^2 + 2 r s without cancellation
        kern = scale * (gap2 + 2.0 * r * s) ** ((prm.alpha - n) / 2.0)
        return kern * gegenbauer(l, n, 1.0 - s) * (s * (2.0 - s)) ** ((n - 3) / 2.0)

    width = max((1.0 - r) ** 2, 1e-300)
    edges = [0.0]
    e = width
    while e < 2.0:
        edges.append(e)
        e *= 8.0
    edges.append(2.0)
    total = 0.0
    with warnings.catch_warnings():
        # quad flags roundoff once it reaches the double-precision floor
        warnings.simplefilter("ignore", IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=rtol, limit=200)
            total += val
    return pref * total


RADIAL_ORDER = 16
RADIAL_LEVELS = 24


def radial_rule(prm: Params, order: int = RADIAL_ORDER, extra_power: float = 0.0, levels: int = RADIAL_LEVELS) -> QuadratureRule:
    """Graded rule in t for the weight (1-t)^{q eps} t^{n/2-1+extra_power}."""
    return graded_jacobi(prm.boundary_exponent, prm.n / 2.0 - 1.0 + extra_power, order, levels=levels)


def matched_ball_rule(prm: Params, order: int = 8, resolution: int = 40, levels: int = 20) -> BallRule:
    """Ball rule whose radial weight matches the (1-t)^{q eps} boundary behavior."""
    return ball_rule(prm.n, order, resolution, prm.boundary_exponent, graded_levels=levels)


@lru_cache(maxsize=128)
def _d_q_integral_cached(prm: Params, m: int) -> float:
    rule = radial_rule(prm, m)
    vals = phi_hat(prm, 0, rule.nodes, rule.complement) ** prm.q
    integral = 0.5 * sphere_area(prm.n) * _c_const(prm) ** prm.q * float(rule.weights @ vals)
    if not math.isfinite(integral) or integral <= 0.0:
        raise QuadratureFailure(f"int_B d^q is not finite and positive for {prm}")
    return integral


def d_q_integral(prm: Params, m: int = RADIAL_ORDER) -> float:
    """int_{B^n} d^q by the graded rule in t with weight (1-t)^{q eps} t^{n/2-1}."""
    return _d_q_integral_cached(prm.require_valid(), int(m))


def tilde_d(prm: Params, m: int = RADIAL_ORDER) -> float:
    """n^{-1} (avg_B d^q)^{1/q}."""
    vol = sphere_area(prm.n) / prm.n
    return (d_q_integral(prm, m) / vol) ** (1.0 / prm.q) / prm.n


def tilde_one(prm: Params, r, m: int = RADIAL_ORDER):
    """(avg_B d^q)^{(1-q)/q} d^{q-1}(r)."""
    vol = sphere_area(prm.n) / prm.n
    avg = d_q_integral(prm, m) / vol
    return avg ** ((1.0 - prm.q) / prm.q) * np.asarray(d_closed(prm, r)) ** (prm.q - 1.0)


@dataclass(frozen=True, eq=False)
class BallField:
    """A function on B^n stored as radial profiles psi_{l,k}(r_j) on a BallRule.

    ``modes`` has shape (basis size, number of radial nodes); entry [i, j] is
    psi_{l,k}(r_j) = int_S v(r_j eta) Y_{l,k}(eta) dV for the i-th (l, k).
    """

    params: Params
    L: int
    rule: BallRule
    modes: np.ndarray

    def __post_init__(self):
        mm = np.array(self.modes, dtype=float)
        expect = (basis(self.params.n, self.L).size, len(self.rule.radial))
        if mm.shape != expect:
            raise ValueError(f"modes must have shape {expect}, got {mm.shape}")
        mm.setflags(write=False)
        object.__setattr__(self, "modes", mm)

    @classmethod
    def from_function(cls, prm: Params, v, L: int, rule: BallRule) -> "BallField":
        """Project samples of ``v`` (callable on ball points) shell by shell."""
        b = basis(prm.n, L, rule.sphere)
        y = b.evaluate(rule.sphere.points)
        vals = np.asarray(v(rule.points), dtype=float).reshape(len(rule.radial), len(rule.sphere))
        modes = (y.T * rule.sphere.weights) @ vals.T
        return cls(prm, L, rule, modes)

    @classmethod
    def from_profiles(cls, prm: Params, L: int, rule: BallRule, profiles: dict) -> "BallField":
        """``profiles`` maps (l, k) to a callable of r (vectorized)."""
        b = basis(prm.n, L)
        modes = np.zeros((b.size, len(rule.radial)))
        for key, fn in profiles.items():
            modes[b.position(*key)] = fn(rule.radii)
        return cls(prm, L, rule, modes)

    def grid_values(self) -> np.ndarray:
        """Values at rule.points in the same (radial-major) order."""
        y = basis(self.params.n, self.L).evaluate(self.rule.sphere.points)
        return (self.modes.T @ y.T).ravel()

    def mode(self, l: int, k: int) -> np.ndarray:
        return self.modes[basis(self.params.n, self.L).position(l, k)]

    def l2_mode_norm2(self, weight_radial=None) -> float:
        """int_B v^2 (times an optional radial weight) via Parseval on each shell."""
        w = self.rule.radial_weights
        if weight_radial is not None:
            w = w * weight_radial
        return float(np.sum(self.modes**2 @ w))


def apply_Q(prm: Params, u: HarmonicExpansion, rule: BallRule) -> BallField:
    """Spectral route: psi_{l,k}(r) = a_{l,k} w_l(r) on the radial nodes of ``rule``."""
    prm.require_valid()
    t, comp = rule.radial.nodes, rule.radial.complement
    b = basis(prm.n, u.L)
    modes = np.zeros((b.size, len(t)))
    for l in range(u.L + 1):
        coeffs = u.degree_coeffs(l)
        if np.any(coeffs != 0.0):
            modes[b.offset(l) : b.offset(l) + n_harmonics(prm.n, l)] = np.outer(coeffs, _w_from_t(prm, l, t, comp))
    return BallField(prm, u.L, rule, modes)


def evaluate_Q(prm: Params, u: HarmonicExpansion, points) -> np.ndarray:
    """Spectral Q(u) at arbitrary interior points.

    Uses solid harmonics: w_l(r) Y_l(x/r) = C (1-t)^eps phi_hat_l(t) Y_l^{solid}(x).
    """
    prm.require_valid()
    x = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.einsum("ij,ij->i", x, x)
    if np.any(t >= 1.0):
        raise DomainError("Q(u) is evaluated at interior points only")
    blocks = basis(prm.n, u.L).evaluate_all(x)
    total = np.zeros(len(x))
    for l in range(u.L + 1):
        coeffs = u.degree_coeffs(l)
        if np.any(coeffs != 0.0):
            total += phi_hat(prm, l, t) * (blocks[l] @ coeffs)
    return _c_const(prm) * (1.0 - t) ** prm.radial_power * total


def apply_Q_quadrature(
    prm: Params, u, points, sphere=None, polar_nodes: int = 96, resolution: int = 12, chunk: int = 64
) -> np.ndarray:
    """Brute-force route: sum_i v_i H(xi, eta_i) u(eta_i) over a sphere rule.

    With ``sphere`` given, that rule is used for every point. Otherwise each
    point gets a product rule with polar axis along xi (``polar_nodes`` Gauss
    points in xi.eta, where H peaks, and an S^{n-2} factor of degree
    ``resolution`` for u).

    ``u`` may return shape (k,) or (k, m); the result is (npoints,) or (npoints, m).
    """
    prm.require_valid()
    x = np.atleast_2d(np.asarray(points, dtype=float))
    parts = []
    if sphere is not None:
        uw = _weighted(u, sphere)
        for start in range(0, len(x), chunk):
            xs = x[start : start + chunk]
            parts.append(kernel_H(prm, xs[:, None, :], sphere.points[None, :, :]) @ uw)
        return np.concatenate(parts, axis=0)
    for xi in x:
        nrm = np.linalg.norm(xi)
        axis = xi / nrm if nrm > 0 else np.eye(prm.n)[0]
        s = aligned_sphere_rule(prm.n, axis, polar_nodes, resolution)
        parts.append(kernel_H(prm, xi[None, :], s.points) @ _weighted(u, s))
    return np.stack(parts, axis=0)


def _weighted(u, s) -> np.ndarray:
    vals = np.asarray(u(s.points), dtype=float)
    return vals * (s.weights if vals.ndim == 1 else s.weights[:, None])


def apply_S(prm: Params, v: BallField) -> HarmonicExpansion:
    """Coefficient of Y_{l,k} is int_0^1 psi_{l,k}(r) w_l(r) r^{n-1} dr."""
    prm.require_valid()
    rule = v.rule
    t, comp = rule.radial.nodes, rule.radial.complement
    wr = rule.radial_weights
    coeffs = np.zeros(v.modes.shape[0])
    b = basis(prm.n, v.L)
    for l in range(v.L + 1):
        sl = slice(b.offset(l), b.offset(l) + n_harmonics(prm.n, l))
        block = v.modes[sl]
        if np.any(block != 0.0):
            coeffs[sl] = block @ (wr * _w_from_t(prm, l, t, comp))
    if not np.all(np.isfinite(coeffs)):
        raise QuadratureFailure("radial integral against w_l is not finite")
    return HarmonicExpansion(prm.n, v.L, coeffs)


def tilde_one_field(prm: Params, rule: BallRule, L: int = 0, m: int = RADIAL_ORDER) -> BallField:
    """1~ as a BallField (radial, mode (0,1) only)."""
    vol = sphere_area(prm.n) / prm.n
    avg = d_q_integral(prm, m) / vol
    t, comp = rule.radial.nodes, rule.radial.complement
    d = _w_from_t(prm, 0, t, comp)
    prof = avg ** ((1.0 - prm.q) / prm.q) * d ** (prm.q - 1.0)
    modes = np.zeros((basis(prm.n, L).size, len(t)))
    modes[0] = prof * math.sqrt(sphere_area(prm.n))
    return BallField(prm, L, rule, modes)


# ---------------------------------------------------------------------------
# half-space extension


def _support_radius(f_radius: float | None) -> float:
    if f_radius is None or not f_radius > 0:
        raise DomainError("a positive support radius for f is required")
    return float(f_radius)


def extension_E(
    prm: Params,
    f,
    x,
    support_radius: float,
    method: str = "tensor",
    nodes: int = 48,
    center=None,
) -> float:
    """E(f)(x) = int x_n^beta f(y') (x_n^2 + |x'-y'|^2)^{-(n-alpha)/2} dy'.

    ``f`` acts on arrays of shape (k, n-1) and vanishes (to rounding) outside
    the ball of radius ``support_radius`` about ``center`` (default 0).
    ``method="tensor"`` uses a Gauss-Legendre product rule on the bounding
    box; ``method="polar"`` uses polar coordinates about x' with log-scaled
    radial panels, which stays accurate as x_n -> 0.
    """
    R = _support_radius(support_radius)
    x = np.asarray(x, dtype=float)
    n = prm.n
    if x.shape != (n,):
        raise DomainError(f"x must have shape ({n},)")
    xp, xn = x[:-1], x[-1]
    if not xn > 0:
        raise DomainError("E is evaluated at x_n > 0")
    c0 = np.zeros(n - 1) if center is None else np.asarray(center, dtype=float)
    if method == "tensor":
        g = gauss_legendre(nodes)
        axes = [c0[k] + R * g.nodes for k in range(n - 1)]
        wts = [R * g.weights for _ in range(n - 1)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1)
        w = wts[0]
        for extra in wts[1:]:
            w = np.multiply.outer(w, extra)
        w = w.ravel()
        dist2 = xn * xn + np.sum((mesh - xp) ** 2, axis=1)
        vals = np.asarray(f(mesh), dtype=float) * dist2 ** ((prm.alpha - n) / 2.0)
        return float(xn**prm.beta * (w @ vals))
    if method == "polar":
        return xn ** (prm.alpha + prm.beta - 1.0) * _polar_scaled(prm, f, xp, xn, R + np.linalg.norm(xp - c0))
    raise ValueError(f"unknown method {method!r}")


def _directions(dim: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature on S^{dim-1} for dim = n - 1 >= 2."""
    if dim == 2:
        ang = 2.0 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(ang), np.sin(ang)], axis=1), np.full(count, 2.0 * math.pi / count)
    s = sphere_rule(dim, count)
    return s.points, s.weights


def _polar_scaled(prm: Params, f, xp: np.ndarray, xn: float, reach: float, panels_per_unit: int = 2, order: int = 16) -> float:
    """int_{S^{n-2}} int_0^inf f(x' + x_n tau w) (1+tau^2)^{-(n-alpha)/2} tau^{n-2} dtau dw."""
    n = prm.n
    dirs, dw = _directions(n - 1, 64 if n == 3 else 24)
    lo = math.log(1e-8)
    hi = math.log(reach / xn)
    npan = max(4, int(math.ceil((hi - lo) * panels_per_unit)))
    g = gauss_legendre(order)
    edges = np.linspace(lo, hi, npan + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    u = (mid[:, None] + half[:, None] * g.nodes[None, :]).ravel()
    wu = (half[:, None] * g.weights[None, :]).ravel()
    tau = np.exp(u)
    radial = (1.0 + tau * tau) ** (-(n - prm.alpha) / 2.0) * tau ** (n - 1) * wu
    pts = xp[None, None, :] + xn * tau[:, None, None] * dirs[None, :, :]
    vals = np.asarray(f(pts.reshape(-1, n - 1)), dtype=float).reshape(len(tau), len(dirs))
    return float(radial @ (vals @ dw))


@dataclass(frozen=True)
class BoundaryLimit:
    """Scaled values at decreasing x_n, their extrapolation, and ratios to the limit constants."""

    xn: tuple[float, ...]
    scaled: tuple[float, ...]
    extrapolated: float
    stated_constant: float
    derived_constant: float
    ratio_stated: float
    ratio_derived: float
    richardson_change: float


def boundary_limit_check(
    prm: Params,
    f,
    x_prime,
    support_radius: float,
    xn_values=(4e-3, 2e-3, 1e-3),
) -> BoundaryLimit:
    """Scaled boundary limit of E(f)(x', x_n) as x_n -> 0.

    alpha < 1: x_n^{1-alpha-beta} E -> pi^{(n-1)/2} Gamma((1-alpha)/2)/Gamma((n-alpha)/2) f(x').
    Richardson extrapolation uses the error order x_n^{min(1-alpha, 2)}.
    alpha = 1: -x_n^{-beta} E / log x_n -> kappa f(x'); the stated constant is
    kappa = |S^{n-1}| and the polar-coordinate computation gives |S^{n-2}|;
    both ratios are reported. The error is O(1/|log x_n|) and the
    extrapolation fits a + b / log x_n.
    alpha > 1 raises UnsupportedCase.
    """
    prm.require_valid()
    if prm.alpha > 1.0:
        raise UnsupportedCase("the alpha > 1 boundary limit involves a fractional Laplacian of f")
    xp = np.asarray(x_prime, dtype=float)
    n = prm.n
    fx = float(np.asarray(f(xp[None, :]))[0])
    if fx == 0.0:
        raise DomainError("f(x') must be nonzero for a ratio")
    R = _support_radius(support_radius) + np.linalg.norm(xp)
    hs = tuple(float(h) for h in xn_values)
    raw = [_polar_scaled(prm, f, xp, h, R) for h in hs]
    if prm.alpha < 1.0:
        scaled = [v / fx for v in raw]
        order = min(1.0 - prm.alpha, 2.0)
        h1, h2 = hs[-2], hs[-1]
        ratio_h = (h1 / h2) ** order
        extrap = (ratio_h * scaled[-1] - scaled[-2]) / (ratio_h - 1.0)
        stated = math.pi ** ((n - 1) / 2.0) * math.exp(
            math.lgamma((1.0 - prm.alpha) / 2.0) - math.lgamma((n - prm.alpha) / 2.0)
        )
        derived = stated
    else:
        # E = x_n^beta * raw; -x_n^{-beta} E / log x_n = -raw / log x_n
        scaled = [-v / (math.log(h) * fx) for v, h in zip(raw, hs)]
        a1, a2 = 1.0 / math.log(hs[-2]), 1.0 / math.log(hs[-1])
        slope = (scaled[-2] - scaled[-1]) / (a1 - a2)
        extrap = scaled[-1] - slope * a2
        stated = sphere_area(n)
        derived = 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n - 1) / 2.0)
    return BoundaryLimit(
        xn=hs,
        scaled=tuple(scaled),
        extrapolated=extrap,
        stated_constant=stated,
        derived_constant=derived,
        ratio_stated=scaled[-1] / stated,
        ratio_derived=scaled[-1] / derived,
        richardson_change=abs(extrap - scaled[-1]) / abs(extrap),
    )
