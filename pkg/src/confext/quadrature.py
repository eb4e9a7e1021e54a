"""Gauss rules on intervals and product rules on the sphere S^{n-1}.

Jacobi rules come from the Golub-Welsch eigenproblem of the three-term
recurrence, followed by a Newton polish of the nodes and Christoffel-number
weights (the reciprocal of the orthonormal kernel sum), which keeps the
small weights near the endpoints accurate in relative terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .specfun import DomainError

__all__ = [
    "QuadratureRule",
    "SphereRule",
    "gauss_legendre",
    "gauss_jacobi",
    "gauss_jacobi_pm1",
    "graded_jacobi",
    "sphere_rule",
    "aligned_sphere_rule",
    "BallRule",
    "ball_rule",
    "sphere_area",
    "ball_volume",
]


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int) -> float:
    return sphere_area(n) / n


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for int_lo^hi w(t) f(t) dt.

    ``complement`` holds hi - node computed without cancellation, which
    matters for integrands singular at the upper endpoint.
    """

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]
    jacobi_exponents: tuple[float, float]
    complement: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def weight_function(self, t) -> np.ndarray:
        lo, hi = self.interval
        e_hi, e_lo = self.jacobi_exponents
        t = np.asarray(t, dtype=float)
        return (hi - t) ** e_hi * (t - lo) ** e_lo

    def integrate(self, f) -> float:
        """sum_j w_j f(t_j); ``f`` is a callable or an array of node values."""
        vals = f(self.nodes) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, vals))


@dataclass(frozen=True, eq=False)
class SphereRule:
    n: int
    points: np.ndarray
    weights: np.ndarray
    resolution: int

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, f) -> float:
        vals = f(self.points) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, vals))


def _jacobi_recurrence(m: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the Jacobi matrix for (1-x)^a (1+x)^b."""
    k = np.arange(m, dtype=float)
    s = 2.0 * k + a + b
    diag = np.empty(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag[:] = (b * b - a * a) / (s * (s + 2.0))
    diag[0] = (b - a) / (a + b + 2.0)
    kk = np.arange(1, m, dtype=float)
    s = 2.0 * kk + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s * s * (s + 1.0) * (s - 1.0))
    if m > 1:
        # k = 1 with a + b = -1 has a removable 0/0
        off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    return diag, np.sqrt(off2)


def _orthonormal_values(x: np.ndarray, diag: np.ndarray, off: np.ndarray, m: int):
    """p_0..p_m (p_0 = 1) of the normalized recurrence and p_m'."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    dp_prev = np.zeros_like(x)
    dp = np.zeros_like(x)
    sq = np.zeros_like(x)
    for k in range(m):
        sq += p * p
        b_k = off[k - 1] if k > 0 else 0.0
        b_next = off[k] if k < m - 1 else 1.0
        p_new = ((x - diag[k]) * p - b_k * p_prev) / b_next
        dp_new = (p + (x - diag[k]) * dp - b_k * dp_prev) / b_next
        p_prev, p = p, p_new
        dp_prev, dp = dp, dp_new
    return p, dp, sq


@lru_cache(maxsize=256)
def _jacobi_pm1_cached(m: int, a: float, b: float):
    diag, off = _jacobi_recurrence(m, a, b)
    if m == 1:
        x = np.array([diag[0]])
    else:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    for _ in range(2):
        p, dp, _ = _orthonormal_values(x, diag, off, m)
        x = x - p / dp
    x = np.sort(x)
    _, _, sq = _orthonormal_values(x, diag, off, m)
    mu0 = math.exp((a + b + 1.0) * math.log(2.0) + math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0))
    w = mu0 / sq
    return x, w


def gauss_jacobi_pm1(m: int, a: float, b: float) -> QuadratureRule:
    """m-point rule on [-1, 1] for the weight (1-x)^a (1+x)^b."""
    if m < 1 or int(m) != m:
        raise ValueError(f"number of nodes must be a positive integer, got {m!r}")
    if not (a > -1.0 and b > -1.0):
        raise DomainError(f"Jacobi exponents must exceed -1, got ({a!r}, {b!r})")
    x, w = _jacobi_pm1_cached(int(m), float(a), float(b))
    return QuadratureRule(_frozen(x), _frozen(w), (-1.0, 1.0), (float(a), float(b)), _frozen(1.0 - x))


def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [-1, 1]."""
    return gauss_jacobi_pm1(m, 0.0, 0.0)


def gauss_jacobi(m: int, exp_hi: float, exp_lo: float) -> QuadratureRule:
    """m-point rule on [0, 1] for the weight (1-t)^exp_hi t^exp_lo."""
    base = gauss_jacobi_pm1(m, exp_hi, exp_lo)
    x = base.nodes
    scale = 2.0 ** -(exp_hi + exp_lo + 1.0)
    t = 0.5 * (1.0 + x)
    return QuadratureRule(
        _frozen(t),
        _frozen(base.weights * scale),
        (0.0, 1.0),
        (float(exp_hi), float(exp_lo)),
        _frozen(0.5 * (1.0 - x)),
    )


@lru_cache(maxsize=256)
def _graded_cached(exp_hi: float, exp_lo: float, order: int, sigma: float, levels: int):
    t_parts, c_parts, w_parts = [], [], []
    # first panel [0, 1 - sigma]: Jacobi weight t^exp_lo at 0, (1-t)^exp_hi analytic there
    first = gauss_jacobi_pm1(order, 0.0, exp_lo)
    width = 1.0 - sigma
    t = 0.5 * width * (1.0 + first.nodes)
    comp = 1.0 - t
    w = first.weights * (0.5 * width) ** (exp_lo + 1.0) * comp**exp_hi
    t_parts.append(t), c_parts.append(comp), w_parts.append(w)
    leg = gauss_legendre(order)
    for j in range(1, levels):
        a, b = sigma**j, sigma ** (j + 1)  # panel [1 - a, 1 - b] in terms of 1 - t
        comp = b + 0.5 * (a - b) * (1.0 - leg.nodes)
        t = 1.0 - comp
        w = 0.5 * (a - b) * leg.weights * comp**exp_hi * t**exp_lo
        t_parts.append(t), c_parts.append(comp), w_parts.append(w)
    # last panel [1 - delta, 1]: Jacobi weight (1-t)^exp_hi at 1
    delta = sigma**levels
    last = gauss_jacobi_pm1(order, exp_hi, 0.0)
    comp = 0.5 * delta * (1.0 - last.nodes)
    t = 1.0 - comp
    w = last.weights * (0.5 * delta) ** (exp_hi + 1.0) * t**exp_lo
    t_parts.append(t), c_parts.append(comp), w_parts.append(w)
    t = np.concatenate(t_parts)
    order_idx = np.argsort(t, kind="stable")
    return t[order_idx], np.concatenate(w_parts)[order_idx], np.concatenate(c_parts)[order_idx]


def graded_jacobi(
    exp_hi: float, exp_lo: float, order: int = 16, sigma: float = 0.25, levels: int = 24
) -> QuadratureRule:
    """Composite rule on [0, 1] for the weight (1-t)^exp_hi t^exp_lo.

    Panels shrink geometrically toward t = 1 (widths sigma^j); the end panels
    carry the Jacobi weight and interior panels use Gauss-Legendre with the
    weight folded in. Converges geometrically for integrands of the form
    (smooth) + (1-t)^gamma (smooth) with non-integer gamma, where a single
    Gauss-Jacobi rule converges only algebraically.
    """
    if not (exp_hi > -1.0 and exp_lo > -1.0):
        raise DomainError(f"Jacobi exponents must exceed -1, got ({exp_hi!r}, {exp_lo!r})")
    if not 0.0 < sigma < 1.0 or levels < 1 or order < 1:
        raise ValueError("need 0 < sigma < 1, levels >= 1, order >= 1")
    t, w, comp = _graded_cached(float(exp_hi), float(exp_lo), int(order), float(sigma), int(levels))
    return QuadratureRule(_frozen(t), _frozen(w), (0.0, 1.0), (float(exp_hi), float(exp_lo)), _frozen(comp))


@lru_cache(maxsize=64)
def _sphere_cached(n: int, resolution: int):
    m = resolution // 2 + 1
    n_phi = max(resolution + 1, 3)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    # start on the circle S^1 and prepend one polar cosine per dimension
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(n_phi, 2.0 * math.pi / n_phi)
    for dim in range(3, n + 1):
        e = (dim - 3) / 2.0
        rule = gauss_jacobi_pm1(m, e, e)
        t = rule.nodes
        s = np.sqrt((1.0 - t) * (1.0 + t))
        new_pts = np.concatenate(
            [np.repeat(t, len(pts))[:, None], np.kron(s[:, None], pts)], axis=1
        )
        wts = np.kron(rule.weights, wts)
        pts = new_pts
    return pts, wts


def sphere_rule(n: int, resolution: int = 30) -> SphereRule:
    """Product rule on S^{n-1} exact for polynomials of degree <= resolution."""
    if not 3 <= n <= 8:
        raise DomainError(f"sphere_rule supports 3 <= n <= 8, got n={n!r}")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    pts, wts = _sphere_cached(int(n), int(resolution))
    return SphereRule(int(n), _frozen(pts), _frozen(wts), int(resolution))


def _rotation_to(axis: np.ndarray) -> np.ndarray:
    """Orthogonal matrix sending e_1 to the unit vector ``axis`` (a Householder reflection)."""
    n = axis.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    v = e1 - axis
    nv = np.dot(v, v)
    if nv < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / nv


def aligned_sphere_rule(n: int, axis, polar_nodes: int = 80, resolution: int = 8) -> SphereRule:
    """Product rule on S^{n-1} whose polar coordinate is t = axis . eta.

    ``polar_nodes`` Gauss points in t (weight (1-t^2)^{(n-3)/2}) resolve
    integrands that peak sharply in the axis direction; the orthogonal
    S^{n-2} factor is exact to degree ``resolution``. ``resolution`` is the
    reported polynomial exactness of the whole rule.
    """
    if not 3 <= n <= 8:
        raise DomainError(f"aligned_sphere_rule supports 3 <= n <= 8, got n={n!r}")
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    e = (n - 3) / 2.0
    polar = gauss_jacobi_pm1(polar_nodes, e, e)
    if n == 3:
        k = max(resolution + 1, 3)
        ang = 2.0 * math.pi * np.arange(k) / k
        sub_pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        sub_w = np.full(k, 2.0 * math.pi / k)
    else:
        sub_pts, sub_w = _sphere_cached(n - 1, int(resolution))
    t = polar.nodes
    sn = np.sqrt((1.0 - t) * (1.0 + t))
    pts = np.concatenate([np.repeat(t, len(sub_pts))[:, None], np.kron(sn[:, None], sub_pts)], axis=1)
    wts = np.kron(polar.weights, sub_w)
    pts = pts @ _rotation_to(axis).T
    return SphereRule(int(n), _frozen(pts), _frozen(wts), int(min(resolution, 2 * polar_nodes - 1)))


@dataclass(frozen=True, eq=False)
class BallRule:
    """Product rule on B^n: radial Jacobi rule in t = r^2 times a sphere rule.

    int_B f dxi = 1/2 int_0^1 t^{n/2-1} int_S f(sqrt(t) eta) dV dt. The radial
    rule carries the weight (1-t)^e t^{n/2-1}; ``weights`` divide out the
    (1-t)^e factor, so e should match the integrand's behavior at r = 1.
    """

    radial: QuadratureRule
    sphere: SphereRule
    boundary_exponent: float

    @property
    def n(self) -> int:
        return self.sphere.n

    @property
    def radii(self) -> np.ndarray:
        return np.sqrt(self.radial.nodes)

    @property
    def radial_weights(self) -> np.ndarray:
        """Weights for int_0^1 g(r) r^{n-1} dr = sum_j w_j g(r_j)."""
        return 0.5 * self.radial.weights * self.radial.complement ** (-self.boundary_exponent)

    @property
    def points(self) -> np.ndarray:
        """Shape (m * n_sphere, n), radial index major."""
        return (self.radii[:, None, None] * self.sphere.points[None, :, :]).reshape(-1, self.n)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.radial_weights, self.sphere.weights).ravel()

    def integrate(self, f) -> float:
        vals = f(self.points) if callable(f) else np.asarray(f, dtype=float)
        return float(np.dot(self.weights, np.ravel(vals)))


def ball_rule(
    n: int, m: int = 64, resolution: int = 30, boundary_exponent: float = 0.0, graded_levels: int = 0
) -> BallRule:
    """Ball rule with an m-point Gauss-Jacobi radial rule, or with the graded
    composite rule of order m when ``graded_levels > 0``."""
    if graded_levels > 0:
        radial = graded_jacobi(boundary_exponent, n / 2.0 - 1.0, m, levels=graded_levels)
    else:
        radial = gauss_jacobi(m, boundary_exponent, n / 2.0 - 1.0)
    return BallRule(radial, sphere_rule(n, resolution), float(boundary_exponent))
