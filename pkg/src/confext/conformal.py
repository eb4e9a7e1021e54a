"""Moebius self-maps of the unit ball and the conformal actions on functions.

A map is stored as rotation o Psi_xi with

    Psi_xi(eta) = ((1-|xi|^2)(eta-xi) - |eta-xi|^2 xi) / (1 - 2 xi.eta + |xi|^2 |eta|^2).

Psi_xi sends xi to 0 and 0 to -xi; its inverse is Psi_{-xi}, and the inverse of
R o Psi_xi is R^T o Psi_{-R xi}. The half-space map I is the inversion in the
sphere of radius sqrt(2) about -e_n, so it is its own inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .specfun import DomainError

__all__ = [
    "MobiusMap",
    "mobius_apply",
    "jacobians",
    "act_boundary",
    "act_ball",
    "halfspace_ball",
    "ball_halfspace",
    "transfer_boundary",
    "transfer_ball",
    "random_mobius",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _as_points(points) -> tuple[np.ndarray, bool]:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """rotation o Psi_base; ``rotation=None`` means the identity."""

    base: np.ndarray
    rotation: np.ndarray | None = field(default=None)

    def __post_init__(self):
        base = np.array(self.base, dtype=float).ravel()
        if base.size < 2:
            raise DomainError("base point needs dimension >= 2")
        if not np.dot(base, base) < 1.0:
            raise DomainError(f"base point must lie in the open ball, |xi| = {np.linalg.norm(base)!r}")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        if self.rotation is not None:
            rot = np.array(self.rotation, dtype=float)
            if rot.shape != (base.size, base.size):
                raise DomainError(f"rotation must be {base.size}x{base.size}")
            if np.max(np.abs(rot.T @ rot - np.eye(base.size))) > 1e-10:
                raise DomainError("rotation must be orthogonal")
            rot.setflags(write=False)
            object.__setattr__(self, "rotation", rot)

    @classmethod
    def identity(cls, n: int) -> "MobiusMap":
        return cls(np.zeros(n))

    @property
    def n(self) -> int:
        return self.base.size

    def _denominator(self, pts: np.ndarray) -> np.ndarray:
        xi = self.base
        return 1.0 - 2.0 * pts @ xi + np.dot(xi, xi) * np.einsum("ij,ij->i", pts, pts)

    def __call__(self, points) -> np.ndarray:
        pts, single = _as_points(points)
        xi = self.base
        s = np.dot(xi, xi)
        diff = pts - xi
        num = (1.0 - s) * diff - np.einsum("ij,ij->i", diff, diff)[:, None] * xi
        out = num / self._denominator(pts)[:, None]
        if self.rotation is not None:
            out = out @ self.rotation.T
        return out[0] if single else out

    def jacobians(self, points) -> tuple[np.ndarray, np.ndarray]:
        """(det dPsi, boundary Jacobian) at ``points``; the second assumes |eta| = 1."""
        pts, single = _as_points(points)
        xi = self.base
        s = np.dot(xi, xi)
        ball = ((1.0 - s) / self._denominator(pts)) ** self.n
        bnd = ((1.0 - s) / (1.0 - 2.0 * pts @ xi + s)) ** (self.n - 1)
        if single:
            return ball[0], bnd[0]
        return ball, bnd

    def inverse(self) -> "MobiusMap":
        if self.rotation is None:
            return MobiusMap(-self.base)
        return MobiusMap(-self.rotation @ self.base, self.rotation.T)


def mobius_apply(mobius: MobiusMap, points) -> np.ndarray:
    return mobius(points)


def jacobians(mobius: MobiusMap, points):
    return mobius.jacobians(points)


def act_boundary(u: ArrayFn, mobius: MobiusMap, p: float, points=None):
    """u_Psi = (boundary Jacobian)^{1/p} u o Psi.

    ``u`` is any callable on sphere points (a HarmonicExpansion qualifies).
    Returns samples at ``points`` if given, otherwise the transformed callable.
    """
    if not p > 1.0:
        raise DomainError(f"exponent must exceed 1, got {p!r}")

    def transformed(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return mobius.jacobians(pts)[1] ** (1.0 / p) * np.asarray(u(mobius(pts)))

    return transformed if points is None else transformed(points)


def act_ball(v: ArrayFn, mobius: MobiusMap, exponent: float, points=None):
    """v_Psi = (det dPsi)^{1/exponent} v o Psi on ball points.

    The dual action uses exponent q'; Q(u_Psi) = (Q u)_Psi holds with exponent q.
    """
    if not exponent > 1.0:
        raise DomainError(f"exponent must exceed 1, got {exponent!r}")

    def transformed(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return mobius.jacobians(pts)[0] ** (1.0 / exponent) * np.asarray(v(mobius(pts)))

    return transformed if points is None else transformed(points)


def _inversion(points) -> np.ndarray:
    pts, single = _as_points(points)
    shifted = pts.copy()
    shifted[:, -1] += 1.0
    out = 2.0 * shifted / np.einsum("ij,ij->i", shifted, shifted)[:, None]
    out[:, -1] -= 1.0
    return out[0] if single else out


def halfspace_ball(x) -> np.ndarray:
    """xi = I(x) = -e_n + 2 (x + e_n) / |x + e_n|^2 for x_n >= 0."""
    pts, _ = _as_points(x)
    if np.any(pts[:, -1] < 0.0):
        raise DomainError("half-space points need x_n >= 0")
    return _inversion(x)


def ball_halfspace(xi) -> np.ndarray:
    """I^{-1}; I is an inversion, so the same formula."""
    pts, _ = _as_points(xi)
    if np.any(np.einsum("ij,ij->i", pts, pts) > 1.0 + 1e-12):
        raise DomainError("points must lie in the closed unit ball")
    return _inversion(xi)


def _en_factor(points) -> np.ndarray:
    """2 / |xi + e_n|^2."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    shifted = pts.copy()
    shifted[:, -1] += 1.0
    return 2.0 / np.einsum("ij,ij->i", shifted, shifted)


def transfer_boundary(f: ArrayFn, alpha: float) -> ArrayFn:
    """u(eta) = (2/|eta+e_n|^2)^{(n+alpha-2)/2} f(I^{-1}(eta)') for f on R^{n-1}."""

    def u(eta):
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        n = eta.shape[1]
        y = _inversion(eta)[:, :-1]
        return _en_factor(eta) ** ((n + alpha - 2.0) / 2.0) * np.asarray(f(y))

    return u


def transfer_ball(values_halfspace: ArrayFn, alpha: float, beta: float) -> ArrayFn:
    """xi -> (2/|xi+e_n|^2)^{(n-alpha-2beta)/2} g(I^{-1}(xi)) for g on the half-space."""

    def out(xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        n = xi.shape[1]
        return _en_factor(xi) ** ((n - alpha - 2.0 * beta) / 2.0) * np.asarray(
            values_halfspace(_inversion(xi))
        )

    return out


def random_mobius(n: int, rng: np.random.Generator, max_radius: float = 0.6, rotate: bool = True) -> MobiusMap:
    """Base point uniform in direction with |xi| uniform on [0, max_radius]."""
    direction = rng.normal(size=n)
    direction /= np.linalg.norm(direction)
    base = rng.uniform(0.0, max_radius) * direction
    rot = None
    if rotate:
        qmat, rmat = np.linalg.qr(rng.normal(size=(n, n)))
        rot = qmat * np.sign(np.diag(rmat))
    return MobiusMap(base, rot)
