"""Gegenbauer polynomials, a real orthonormal spherical-harmonic basis,
projection onto it, and Funk-Hecke eigenvalues of zonal kernels.

The production basis is the Gegenbauer product (hyperspherical) basis,
built recursively in the dimension:

    Y_{l,(m,k)}(x) = N * |x|^{l-m} C_{l-m}^{m+(d-2)/2}(x_1/|x|) * H'_{m,k}(x_2..x_d)

with H' the basis one dimension down, and cos/sin of m*phi on S^1. Every
function is a homogeneous harmonic polynomial evaluated through stable
recurrences, so it can be evaluated anywhere in R^n (as a solid harmonic).
Degree 1 comes out as sqrt(n/|S|) * (eta_1, ..., eta_n).

``monomial_harmonics`` builds H_l the other way, by Gram-Schmidt on
Laplacian-projected monomials under exact sphere moments. It is kept as an
independent construction for cross-checking the span at low degree.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import null_space
from scipy.special import gammaln

from .quadrature import SphereRule, gauss_jacobi_pm1, sphere_area
from .specfun import DomainError, beta_fn, hyp2f1

__all__ = [
    "n_harmonics",
    "gegenbauer",
    "zonal_kernel",
    "HarmonicBasis",
    "HarmonicExpansion",
    "basis",
    "monomial_harmonics",
    "project",
    "funk_hecke",
    "funk_hecke_with_error",
    "FunkHeckeWarning",
    "kernel_moment_identity",
]


class FunkHeckeWarning(RuntimeWarning):
    """The Funk-Hecke integral did not converge under node doubling."""


def n_harmonics(n: int, l: int) -> int:
    """dim H_l on S^{n-1}."""
    if l == 0:
        return 1
    return (2 * l + n - 2) * math.comb(l + n - 3, l) // (n - 2)


def gegenbauer(l: int, n: int, t):
    """C_l^{(n-2)/2}(t) by the three-term recurrence."""
    lam = (n - 2) / 2.0
    t = np.asarray(t, dtype=float)
    c_prev = np.ones_like(t)
    if l == 0:
        return c_prev if t.ndim else float(c_prev)
    c = 2.0 * lam * t
    for k in range(1, l):
        c_prev, c = c, (2.0 * (k + lam) * t * c - (k + 2.0 * lam - 1.0) * c_prev) / (k + 1.0)
    return c if t.ndim else float(c)


def zonal_kernel(l: int, n: int, t):
    """Reproducing kernel of H_l: sum_k Y_{l,k}(x) Y_{l,k}(y) as a function of t = x.y."""
    c1 = math.comb(l + n - 3, l)  # C_l^{(n-2)/2}(1)
    return n_harmonics(n, l) / sphere_area(n) * np.asarray(gegenbauer(l, n, t)) / c1


def _monomials(n: int, l: int) -> np.ndarray:
    """Exponent vectors of total degree l, in descending lexicographic order."""
    out = [e for e in itertools.product(range(l, -1, -1), repeat=n) if sum(e) == l]
    return np.array(out, dtype=int).reshape(-1, n)


def _sphere_moments(e: np.ndarray) -> np.ndarray:
    """int_S x^e dV for each row of e."""
    half = (e + 1) / 2.0
    vals = 2.0 * np.exp(gammaln(half).sum(axis=-1) - gammaln(half.sum(axis=-1)))
    return np.where(np.any(e % 2, axis=-1), 0.0, vals)


def _laplacian_matrix(n: int, l: int, exps: np.ndarray) -> np.ndarray:
    lower = _monomials(n, l - 2)
    index = {tuple(e): i for i, e in enumerate(lower)}
    lap = np.zeros((len(lower), len(exps)))
    for j, e in enumerate(exps):
        for i in range(n):
            if e[i] >= 2:
                f = e.copy()
                f[i] -= 2
                lap[index[tuple(f)], j] += e[i] * (e[i] - 1)
    return lap


@lru_cache(maxsize=64)
def monomial_harmonics(n: int, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponents and coefficient matrix (n_mon x N_l) of an orthonormal basis of H_l.

    Built by Gram-Schmidt, in monomial order, on the Laplacian-kernel
    projections of the degree-l monomials; inner products use exact sphere
    moments. Conditioning limits this route to moderate l.
    """
    exps = _monomials(n, l)
    n_mon = len(exps)
    gram = _sphere_moments(exps[:, None, :] + exps[None, :, :])
    if l < 2:
        candidates = np.eye(n_mon)
    else:
        ker = null_space(_laplacian_matrix(n, l, exps))
        candidates = ker @ ker.T  # projector columns are canonical
    target = n_harmonics(n, l)
    vecs: list[np.ndarray] = []
    for j in range(n_mon):
        v = candidates[:, j].copy()
        norm0 = math.sqrt(max(v @ gram @ v, 0.0))
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for u in vecs:
                v -= (u @ gram @ v) * u
        norm = math.sqrt(max(v @ gram @ v, 0.0))
        if norm <= 1e-8 * norm0:
            continue
        vecs.append(v / norm)
        if len(vecs) == target:
            break
    if len(vecs) != target:
        raise RuntimeError(f"monomial harmonic construction failed at n={n}, l={l}")
    return exps, np.array(vecs).T


def evaluate_monomial_harmonics(n: int, l: int, points) -> np.ndarray:
    exps, coef = monomial_harmonics(n, l)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    mono = np.ones((len(x), len(exps)))
    for i in range(n):
        powers = x[:, i : i + 1] ** np.arange(l + 1)
        mono *= powers[:, exps[:, i]]
    return mono @ coef


def _gegenbauer_norm2(j: int, mu: float) -> float:
    """int_{-1}^1 C_j^mu(t)^2 (1-t^2)^{mu-1/2} dt."""
    return math.pi * math.exp(
        (1.0 - 2.0 * mu) * math.log(2.0)
        + math.lgamma(j + 2.0 * mu)
        - math.lgamma(j + 1.0)
        - 2.0 * math.lgamma(mu)
    ) / (j + mu)


def _solid_harmonics(x: np.ndarray, L: int) -> list[np.ndarray]:
    """Orthonormal solid harmonics of degrees 0..L at the rows of x."""
    npts, d = x.shape
    if d == 2:
        z = x[:, 0] + 1j * x[:, 1]
        out = [np.full((npts, 1), 1.0 / math.sqrt(2.0 * math.pi))]
        zm = np.ones(npts, dtype=complex)
        for _ in range(L):
            zm = zm * z
            out.append(np.stack([zm.real, zm.imag], axis=1) / math.sqrt(math.pi))
        return out
    lower = _solid_harmonics(x[:, 1:], L)
    x1 = x[:, 0]
    rho2 = np.einsum("ij,ij->i", x, x)
    blocks: list[list[np.ndarray]] = [[] for _ in range(L + 1)]
    for m in range(L + 1):
        mu = m + (d - 2) / 2.0
        g_prev = np.ones(npts)
        g = 2.0 * mu * x1
        for j in range(L - m + 1):
            if j == 0:
                cur = g_prev
            elif j == 1:
                cur = g
            else:
                g_prev, g = g, (2.0 * (j - 1 + mu) * x1 * g - (j - 2 + 2.0 * mu) * rho2 * g_prev) / j
                cur = g
            scale = 1.0 / math.sqrt(_gegenbauer_norm2(j, mu))
            blocks[m + j].append((scale * cur)[:, None] * lower[m])
    return [np.concatenate(b, axis=1) for b in blocks]


@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """Orthonormal real spherical harmonics Y_{l,k}, 0 <= l <= L, 1 <= k <= N_l."""

    n: int
    L: int

    @property
    def index(self) -> list[tuple[int, int]]:
        return [(l, k) for l in range(self.L + 1) for k in range(1, n_harmonics(self.n, l) + 1)]

    @property
    def size(self) -> int:
        return sum(n_harmonics(self.n, l) for l in range(self.L + 1))

    def offset(self, l: int) -> int:
        return sum(n_harmonics(self.n, j) for j in range(l))

    def position(self, l: int, k: int) -> int:
        if not (0 <= l <= self.L and 1 <= k <= n_harmonics(self.n, l)):
            raise KeyError((l, k))
        return self.offset(l) + k - 1

    def evaluate_all(self, points, L: int | None = None) -> list[np.ndarray]:
        """Per-degree value blocks, entry l has shape (npts, N_l)."""
        x = np.atleast_2d(np.asarray(points, dtype=float))
        return _solid_harmonics(x, self.L if L is None else L)

    def evaluate_degree(self, l: int, points) -> np.ndarray:
        """Values Y_{l,k}(x) for all k, shape (npts, N_l); solid harmonics off the sphere."""
        if not 0 <= l <= self.L:
            raise KeyError(l)
        return self.evaluate_all(points, l)[l]

    def evaluate(self, points) -> np.ndarray:
        """Values of every basis function, shape (npts, size)."""
        return np.concatenate(self.evaluate_all(points), axis=1)

    def degrees(self) -> np.ndarray:
        return np.concatenate(
            [np.full(n_harmonics(self.n, l), l) for l in range(self.L + 1)]
        )


@lru_cache(maxsize=64)
def _basis_cached(n: int, L: int) -> HarmonicBasis:
    return HarmonicBasis(n, L)


def basis(n: int, L: int, rule: SphereRule | None = None) -> HarmonicBasis:
    """Orthonormal basis up to degree L; ``rule`` (if given) must resolve degree 2L."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    if rule is not None and 2 * L > rule.resolution:
        raise ValueError(
            f"degree L={L} needs a sphere rule of resolution >= {2 * L}, got {rule.resolution}"
        )
    return _basis_cached(int(n), int(L))


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """sum_{l,k} a_{l,k} Y_{l,k} with coefficients stored in basis order."""

    n: int
    L: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (basis(self.n, self.L).size,):
            raise ValueError("coefficient vector does not match the basis size")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, n: int, L: int, entries: dict[tuple[int, int], float]) -> "HarmonicExpansion":
        b = basis(n, L)
        c = np.zeros(b.size)
        for (l, k), v in entries.items():
            c[b.position(l, k)] = v
        return cls(n, L, c)

    @classmethod
    def single(cls, n: int, l: int, k: int, L: int | None = None) -> "HarmonicExpansion":
        return cls.from_dict(n, l if L is None else L, {(l, k): 1.0})

    @classmethod
    def constant(cls, n: int, value: float = 1.0, L: int = 0) -> "HarmonicExpansion":
        return cls.from_dict(n, L, {(0, 1): value * math.sqrt(sphere_area(n))})

    def as_dict(self) -> dict[tuple[int, int], float]:
        return dict(zip(basis(self.n, self.L).index, self.coeffs.tolist()))

    def degree_coeffs(self, l: int) -> np.ndarray:
        b = basis(self.n, self.L)
        start = b.offset(l)
        return self.coeffs[start : start + n_harmonics(self.n, l)]

    def degree_component(self, l: int, points) -> np.ndarray:
        return basis(self.n, self.L).evaluate_degree(l, points) @ self.degree_coeffs(l)

    def __call__(self, points) -> np.ndarray:
        return basis(self.n, self.L).evaluate(points) @ self.coeffs

    def norm2(self) -> float:
        return float(np.sqrt(self.coeffs @ self.coeffs))


def project(
    samples: np.ndarray | Callable[[np.ndarray], np.ndarray],
    L: int,
    rule: SphereRule,
) -> HarmonicExpansion:
    """a_{l,k} = int f Y_{l,k} dV by the sphere rule."""
    b = basis(rule.n, L, rule)
    vals = samples(rule.points) if callable(samples) else np.asarray(samples, dtype=float)
    coeffs = b.evaluate(rule.points).T @ (rule.weights * vals)
    return HarmonicExpansion(rule.n, L, coeffs)


def _fh_integral(kernel_profile, l: int, n: int, m: int) -> tuple[float, float]:
    """Eigenvalue and the same sum with absolute values (a cancellation scale)."""
    e = (n - 3) / 2.0
    rule = gauss_jacobi_pm1(m, e, e)
    t = rule.nodes
    vals = np.asarray(kernel_profile(t), dtype=float) * gegenbauer(l, n, t)
    lam = (n - 2) / 2.0
    pref = (4.0 * math.pi) ** lam * math.exp(
        math.lgamma(lam) + math.lgamma(l + 1.0) - math.lgamma(l + n - 2.0)
    )
    return pref * float(rule.weights @ vals), pref * float(rule.weights @ np.abs(vals))


def funk_hecke_with_error(kernel_profile, l: int, n: int, m: int = 128) -> tuple[float, float]:
    """Funk-Hecke eigenvalue and the change under node doubling."""
    coarse, _ = _fh_integral(kernel_profile, l, n, m)
    fine, _ = _fh_integral(kernel_profile, l, n, 2 * m)
    return fine, abs(fine - coarse)


def funk_hecke(kernel_profile, l: int, n: int, m: int = 128, rtol: float = 1e-10) -> float:
    """lambda_l with int_S K(xi.eta) Y_l(eta) dV(eta) = lambda_l Y_l(xi).

    Emits ``FunkHeckeWarning`` with the estimated error when doubling the
    number of nodes changes the value by more than ``rtol`` (relative to the
    integral of |K C_l|).
    """
    coarse, _ = _fh_integral(kernel_profile, l, n, m)
    fine, scale = _fh_integral(kernel_profile, l, n, 2 * m)
    err = abs(fine - coarse)
    if err > rtol * max(abs(fine), scale, 1e-300):
        warnings.warn(
            f"Funk-Hecke quadrature not converged: estimated error {err:.3e}", FunkHeckeWarning
        )
    return fine


def kernel_moment_identity(mu: float, nu: float, r: float, rtol: float = 1e-13, max_nodes: int = 4096) -> tuple[float, float]:
    """Both sides of

        int_{-1}^{1} (r^2+1-2rs)^{-mu} (1-s^2)^{nu-1/2} ds = B(1/2, nu+1/2) F(mu, mu-nu; nu+1; r^2).

    The left side is Gauss-Jacobi quadrature with node doubling until two
    successive values agree to ``rtol``.
    """
    if not nu > -0.5:
        raise DomainError(f"nu must exceed -1/2, got {nu!r}")
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r!r}")
    lam = nu - 0.5
    m, prev = 32, None
    while True:
        rule = gauss_jacobi_pm1(m, lam, lam)
        val = float(rule.weights @ ((1.0 - r) ** 2 + 2.0 * r * rule.complement) ** (-mu))
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            break
        if m >= max_nodes:
            warnings.warn(f"kernel moment quadrature unconverged at {m} nodes", FunkHeckeWarning, stacklevel=2)
            break
        prev, m = val, 2 * m
    rhs = beta_fn(0.5, nu + 0.5) * float(hyp2f1(mu, mu - nu, nu + 1.0, r * r))
    return val, rhs
