"""Deficit and distance functionals for Q and S, Figalli-Zhang scalar
inequalities, first-variation identities, the dual gap bound, and the
optimality-ratio sweeps.

Primal deficit:  c^p - ||Q u||_q^p / ||u||_p^p.
Dual deficit:    c^{q'} - ||S v||_{p'}^{q'} / ||v||_{q'}^{q'}.

Norms on the ball use the graded ball rule matched to (1-t)^{q eps}, which is
the boundary behavior of |Q u|^q, |v|^{q'} for v in the orbit of 1~, and of
every radial integrand below. Distances minimize over the conformal orbit
(xi, lambda) with multi-start Nelder-Mead; xi = tanh|z| z/|z| keeps the
search unconstrained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .conformal import MobiusMap, act_ball, act_boundary
from .constants import K_prefactor, A_l, c_sharp
from .harmonics import HarmonicExpansion, project
from .operators import (
    BallField,
    _c_const,
    _w_from_t,
    apply_Q,
    apply_S,
    d_closed,
    d_q_integral,
    matched_ball_rule,
    phi_hat,
    tilde_d,
    tilde_one,
    tilde_one_field,
)
from .params import Params
from .quadrature import BallRule, SphereRule, ball_volume, graded_jacobi, sphere_area, sphere_rule
from .specfun import DomainError

__all__ = [
    "StabilityConfig",
    "OrbitPoint",
    "OptimizerTrace",
    "StabilityReport",
    "FZParams",
    "deficit_primal",
    "deficit_dual",
    "distance_primal",
    "distance_dual",
    "tilde_one_points",
    "zeta",
    "fz_residual",
    "fz_check",
    "estimate_c_kappa",
    "fz_nonnegativity",
    "variation_checks",
    "DualGap",
    "dual_gap_check",
    "SweepRow",
    "optimality_sweep",
    "quadratic_limit",
    "FAMILIES",
]

FAMILIES = ("quadratic", "orbit-shift", "dual")

# below this the orbit distance is optimizer noise and ratios are not reported
DISTANCE_FLOOR = 1e-14


@dataclass(frozen=True)
class StabilityConfig:
    """Resolution settings shared by the deficit and distance functionals."""

    L: int = 24
    sphere_resolution: int = 60
    radial_order: int = 16
    # deeper grading puts nodes where 1 - |x|^2 is lost to rounding in sampled callables
    radial_levels: int = 16
    distance_sphere_resolution: int = 40
    distance_radial_order: int = 8
    distance_radial_levels: int = 16
    distance_ball_resolution: int = 16
    xatol: float = 1e-10
    fatol: float = 1e-15
    maxiter: int = 4000
    seed_radius: float = 0.3

    @classmethod
    def for_dimension(cls, n: int) -> "StabilityConfig":
        """Resolutions scaled so sphere rules stay near a few thousand points."""
        if n <= 3:
            return cls()
        if n == 4:
            return cls(L=12, sphere_resolution=24, distance_sphere_resolution=20, distance_ball_resolution=10)
        return cls(L=8, sphere_resolution=12, distance_sphere_resolution=12, distance_ball_resolution=8)

    def sphere(self, n: int) -> SphereRule:
        return sphere_rule(n, max(self.sphere_resolution, 2 * self.L))

    def ball(self, prm: Params) -> BallRule:
        return matched_ball_rule(
            prm, self.radial_order, max(self.sphere_resolution, 2 * self.L), self.radial_levels
        )

    def distance_sphere(self, n: int) -> SphereRule:
        return sphere_rule(n, self.distance_sphere_resolution)

    def distance_ball(self, prm: Params) -> BallRule:
        return matched_ball_rule(
            prm, self.distance_radial_order, self.distance_ball_resolution, self.distance_radial_levels
        )




@dataclass(frozen=True)
class OrbitPoint:
    map: MobiusMap
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise DomainError(f"lambda must be positive, got {self.lam!r}")

    @property
    def xi(self) -> np.ndarray:
        return self.map.base


@dataclass(frozen=True)
class OptimizerTrace:
    iterations: int
    evaluations: int
    spread: float
    converged: bool
    starts: int


@dataclass(frozen=True)
class StabilityReport:
    deficit: float
    distance: float
    ratio: float
    argmin: OrbitPoint
    trace: OptimizerTrace
    functional: str
    flagged: bool = False
    notes: tuple[str, ...] = field(default_factory=tuple)


# ------------------------------------------------------------------ helpers


def _sphere_samples(u, rule: SphereRule) -> np.ndarray:
    return np.asarray(u(rule.points), dtype=float)


def _expansion(u, L: int, rule: SphereRule) -> HarmonicExpansion:
    if isinstance(u, HarmonicExpansion):
        return u
    return project(u, L, rule)


def _to_field(prm: Params, v, rule: BallRule, L: int) -> BallField:
    if isinstance(v, BallField):
        return v
    return BallField.from_function(prm, v, L, rule)


def _ball_values(v, field_: BallField, rule: BallRule) -> np.ndarray:
    if isinstance(v, BallField):
        return v.grid_values()
    return np.asarray(v(rule.points), dtype=float)


def tilde_one_points(prm: Params, points) -> np.ndarray:
    """1~ = (avg_B d^q)^{(1-q)/q} d^{q-1} at ball points."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.sqrt(np.einsum("ij,ij->i", x, x))
    return tilde_one(prm, np.minimum(r, np.nextafter(1.0, 0.0)))


# ------------------------------------------------------------------ deficits


def deficit_primal(prm: Params, u, config: StabilityConfig | None = None) -> float:
    """c^p - ||Q u||_q^p / ||u||_p^p.

    ``u`` is a HarmonicExpansion or a callable on sphere points; callables
    are projected to degree ``config.L`` before Q is applied mode by mode.
    """
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    s = config.sphere(prm.n)
    vals = _sphere_samples(u, s)
    norm_u = s.integrate(np.abs(vals) ** prm.p)
    if not norm_u > 0.0:
        raise DomainError("u must be nonzero")
    expansion = _expansion(u, config.L, s)
    rule = config.ball(prm)
    qu = apply_Q(prm, expansion, rule).grid_values()
    norm_q = rule.integrate(np.abs(qu) ** prm.q)
    return c_sharp(prm, config.radial_order) ** prm.p - norm_q ** (prm.p / prm.q) / norm_u


def deficit_dual(prm: Params, v, config: StabilityConfig | None = None) -> float:
    """c^{q'} - ||S v||_{p'}^{q'} / ||v||_{q'}^{q'}; ``v`` is a BallField or a callable on ball points."""
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    rule = v.rule if isinstance(v, BallField) else config.ball(prm)
    fld = _to_field(prm, v, rule, config.L)
    vals = _ball_values(v, fld, rule)
    norm_v = rule.integrate(np.abs(vals) ** prm.q_prime)
    if not norm_v > 0.0:
        raise DomainError("v must be nonzero")
    sv = apply_S(prm, fld)
    s = config.sphere(prm.n)
    norm_s = s.integrate(np.abs(sv(s.points)) ** prm.p_prime)
    qp = prm.q_prime
    return c_sharp(prm, config.radial_order) ** qp - norm_s ** (qp / prm.p_prime) / norm_v


# ------------------------------------------------------------------ distances


def _orbit_from(x: np.ndarray) -> tuple[MobiusMap, float]:
    z, loglam = x[:-1], x[-1]
    nz = float(np.linalg.norm(z))
    xi = np.zeros_like(z) if nz == 0.0 else math.tanh(nz) * z / nz
    return MobiusMap(xi), math.exp(loglam)


def _seeds(n: int, radius: float) -> list[np.ndarray]:
    out = [np.zeros(n)]
    for k in range(n):
        for sign in (1.0, -1.0):
            e = np.zeros(n)
            e[k] = sign * radius
            out.append(e)
    return out


def _minimize_orbit(objective: Callable[[MobiusMap, float], float], n: int, lam0: float, config: StabilityConfig, extra_seeds=()):
    best, best_res, iters, evals = None, None, 0, 0
    converged_all = True
    seeds = _seeds(n, config.seed_radius) + [np.asarray(s, dtype=float) for s in extra_seeds]

    def wrapped(x):
        m, lam = _orbit_from(x)
        return objective(m, lam)

    for seed in seeds:
        x0 = np.concatenate([seed, [math.log(lam0)]])
        res = minimize(
            wrapped,
            x0,
            method="Nelder-Mead",
            options={"xatol": config.xatol, "fatol": config.fatol, "maxiter": config.maxiter, "adaptive": True},
        )
        iters += int(res.nit)
        evals += int(res.nfev)
        converged_all &= bool(res.success)
        if best is None or res.fun < best:
            best, best_res = float(res.fun), res
    simplex = best_res.final_simplex[0]
    spread = float(np.max(np.abs(simplex - simplex[0])))
    m, lam = _orbit_from(best_res.x)
    trace = OptimizerTrace(iters, evals, spread, bool(best_res.success), len(seeds))
    return best, OrbitPoint(m, lam), trace, converged_all


def _primal_functional(prm: Params, name: str | None) -> tuple[str, Callable[[np.ndarray, SphereRule], float]]:
    if name is None:
        name = "lp^p+l2^2" if prm.alpha <= 1.0 else "lp^2"
    p = prm.p
    if name == "lp^p+l2^2":
        return name, lambda g, s: s.integrate(np.abs(g) ** p) + s.integrate(g * g)
    if name == "lp^2":
        return name, lambda g, s: s.integrate(np.abs(g) ** p) ** (2.0 / p)
    if name == "lp":
        return name, lambda g, s: s.integrate(np.abs(g) ** p) ** (1.0 / p)
    raise ValueError(f"unknown functional {name!r}")


def distance_primal(
    prm: Params,
    u,
    functional: str | None = None,
    config: StabilityConfig | None = None,
    with_deficit: bool = True,
    extra_seeds: Sequence = (),
) -> StabilityReport:
    """inf over (Psi, lambda) of the regime functional of lambda |S|^{1/p} u_Psi - 1.

    Regime functional: ||.||_p^p + ||.||_2^2 for alpha <= 1 (p >= 2),
    ||.||_p^2 for alpha > 1; ``functional="lp"`` gives the plain L^p norm.
    """
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    name, func = _primal_functional(prm, functional)
    s = config.distance_sphere(prm.n)
    scale = sphere_area(prm.n) ** (1.0 / prm.p)
    norm_u = s.integrate(np.abs(_sphere_samples(u, s)) ** prm.p) ** (1.0 / prm.p)
    if not norm_u > 0.0:
        raise DomainError("u must be nonzero")

    def objective(m, lam):
        g = lam * scale * act_boundary(u, m, prm.p, s.points) - 1.0
        return func(g, s)

    best, point, trace, ok = _minimize_orbit(objective, prm.n, 1.0 / norm_u, config, extra_seeds)
    deficit = deficit_primal(prm, u, config) if with_deficit else math.nan
    ratio = deficit / best if with_deficit and best > DISTANCE_FLOOR else math.nan
    notes = () if ok else ("at least one Nelder-Mead start hit its iteration cap",)
    return StabilityReport(deficit, best, ratio, point, trace, name, flagged=not trace.converged, notes=notes)


def distance_dual(
    prm: Params,
    v,
    config: StabilityConfig | None = None,
    with_deficit: bool = True,
    power: float = 2.0,
    extra_seeds: Sequence = (),
) -> StabilityReport:
    """inf over (Psi, lambda) of ||lambda |B|^{1/q'} v_Psi - 1~||_{q'}^power (power 2 by default).

    ``v`` is a callable on ball points.
    """
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    rule = config.distance_ball(prm)
    qp = prm.q_prime
    target = tilde_one_points(prm, rule.points)
    scale = ball_volume(prm.n) ** (1.0 / qp)
    norm_v = rule.integrate(np.abs(np.asarray(v(rule.points), dtype=float)) ** qp) ** (1.0 / qp)
    if not norm_v > 0.0:
        raise DomainError("v must be nonzero")

    def objective(m, lam):
        g = lam * scale * act_ball(v, m, qp, rule.points) - target
        return rule.integrate(np.abs(g) ** qp) ** (power / qp)

    best, point, trace, ok = _minimize_orbit(objective, prm.n, 1.0 / norm_v, config, extra_seeds)
    deficit = deficit_dual(prm, v, config) if with_deficit else math.nan
    ratio = deficit / best if with_deficit and best > DISTANCE_FLOOR else math.nan
    notes = () if ok else ("at least one Nelder-Mead start hit its iteration cap",)
    name = f"lq'^{power:g}"
    return StabilityReport(deficit, best, ratio, point, trace, name, flagged=not trace.converged, notes=notes)


# ------------------------------------------------------------------ Figalli-Zhang


@dataclass(frozen=True)
class FZParams:
    r: float
    kappa: float
    a: float | np.ndarray = 0.0

    def __post_init__(self):
        if not self.r > 1.0:
            raise DomainError(f"r must exceed 1, got {self.r!r}")
        if not 0.0 < self.kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa!r}")


def zeta(r: float, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    inside = (a >= -2.0) & (a <= 0.0)
    b = np.abs(1.0 + a)
    if r >= 2.0:
        return np.where(inside, b ** (r - 1.0), 1.0)
    return np.where(inside, 1.0, b / ((2.0 - r) * b + (r - 1.0)))


def _quadratic_part(r: float, a: np.ndarray) -> np.ndarray:
    """a^2 + (r-2) zeta(a) (1-|1+a|)^2."""
    return a * a + (r - 2.0) * zeta(r, a) * (1.0 - np.abs(1.0 + a)) ** 2


def fz_residual(r: float, kappa: float, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.abs(1.0 + a) ** r - (1.0 + r * a + 0.5 * r * (1.0 - kappa) * _quadratic_part(r, a))


def fz_check(fz: FZParams) -> np.ndarray | float:
    """Residual of the scalar inequality with the c_kappa term dropped; it is nonnegative for every a."""
    out = fz_residual(fz.r, fz.kappa, fz.a)
    return float(out) if np.ndim(out) == 0 else out


def estimate_c_kappa(r: float, kappa: float, a_grid) -> float:
    """min over a != 0 of residual / (|a|^r for r >= 2, min(|a|^r, a^2) for r < 2)."""
    FZParams(r, kappa)
    a = np.asarray(a_grid, dtype=float)
    a = a[a != 0.0]
    res = fz_residual(r, kappa, a)
    denom = np.abs(a) ** r if r >= 2.0 else np.minimum(np.abs(a) ** r, a * a)
    return float(np.min(res / denom))


def fz_nonnegativity(r: float, a) -> np.ndarray:
    """a^2 + (r-2) zeta(a) (1-|1+a|)^2, nonnegative for 1 < r < 2."""
    return _quadratic_part(r, np.asarray(a, dtype=float))


# ------------------------------------------------------------------ variations


def variation_checks(
    prm: Params, phi: HarmonicExpansion, psi=None, config: StabilityConfig | None = None
) -> tuple[float, float]:
    """(residual_1, residual_2).

    residual_1 = |int_B d^{q-1} Q(phi) / int_B d^q - avg_S phi|,
    residual_2 = |avg_B psi 1~^{q'-1} - avg_S S(psi) / S(1~)| with S(1~) = d~.
    ``psi`` (callable on ball points) defaults to the solid-harmonic extension of phi.
    """
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    rule = matched_ball_rule(prm, config.radial_order, max(8, 2 * phi.L + 4), config.radial_levels)
    t, comp = rule.radial.nodes, rule.radial.complement
    d_grid = np.repeat(_w_from_t(prm, 0, t, comp), len(rule.sphere))
    qphi = apply_Q(prm, phi, rule).grid_values()
    lhs1 = rule.integrate(d_grid ** (prm.q - 1.0) * qphi) / rule.integrate(d_grid**prm.q)
    rhs1 = phi.coeffs[0] / math.sqrt(sphere_area(prm.n))
    if psi is None:
        psi = phi
    fld = BallField.from_function(prm, psi, phi.L, rule)
    one_t = tilde_one_field(prm, rule, 0, config.radial_order).grid_values()
    lhs2 = rule.integrate(np.asarray(psi(rule.points)) * one_t ** (prm.q_prime - 1.0)) / ball_volume(prm.n)
    s_psi = apply_S(prm, fld)
    rhs2 = s_psi.coeffs[0] / math.sqrt(sphere_area(prm.n)) / tilde_d(prm, config.radial_order)
    return abs(lhs1 - rhs1), abs(lhs2 - rhs2)


# ------------------------------------------------------------------ dual gap


@dataclass(frozen=True)
class DualGap:
    lhs_bracket: float
    rhs: float
    margin: float
    I2: float
    I1: float
    first_moment: float
    second_moment: float

    @property
    def subtracted(self) -> float:
        return self.first_moment**2 / self.second_moment


def _radial(prm: Params, exp_hi: float, exp_lo: float, values: Callable[[np.ndarray, np.ndarray], np.ndarray], order: int, levels: int) -> float:
    rule = graded_jacobi(exp_hi, exp_lo, order, levels=levels)
    return 0.5 * float(rule.weights @ values(rule.nodes, rule.complement))


def dual_gap_check(prm: Params, order: int = 16, levels: int = 24) -> DualGap:
    """Weighted radial integrals with weight 1~^{2-q'}.

    I_l = int_0^1 w_l^2 r^{n-1} 1~^{2-q'} dr, M = int_0^1 w_1 r^n 1~^{2-q'} dr,
    R = int_0^1 r^{n+1} 1~^{2-q'} dr; lhs = max(I_2, I_1 - M^2/R) against
    rhs = (q'-1)/(p'-1) d~^2 |S^{n-1}| / |B^n|.
    """
    prm.require_valid()
    n, q, qp, eps = prm.n, prm.q, prm.q_prime, prm.radial_power
    C = _c_const(prm)
    K = (d_q_integral(prm, order) / ball_volume(n)) ** ((1.0 - q) / q)
    wfac = K ** (2.0 - qp)  # 1~^{2-q'} = wfac (C phi_hat_0)^{q-2} (1-t)^{(q-2) eps}

    def base(t, c):
        return wfac * (C * phi_hat(prm, 0, t, c)) ** (q - 2.0)

    def I(l):
        return _radial(prm, q * eps, n / 2.0 - 1.0 + l, lambda t, c: base(t, c) * (C * phi_hat(prm, l, t, c)) ** 2, order, levels)

    I1, I2 = I(1), I(2)
    M = _radial(prm, (q - 1.0) * eps, n / 2.0, lambda t, c: base(t, c) * C * phi_hat(prm, 1, t, c), order, levels)
    R = _radial(prm, (q - 2.0) * eps, n / 2.0, base, order, levels)
    lhs = max(I2, I1 - M * M / R)
    rhs = (qp - 1.0) / (prm.p_prime - 1.0) * tilde_d(prm, order) ** 2 * sphere_area(n) / ball_volume(n)
    return DualGap(lhs, rhs, rhs - lhs, I2, I1, M, R)


# ------------------------------------------------------------------ sweeps


@dataclass(frozen=True)
class SweepRow:
    eps: float
    deficit: float
    dist2: float
    distp: float
    ratio2: float
    ratiop: float
    flagged: bool = False

    def record(self) -> dict:
        return {
            "eps": self.eps,
            "deficit": self.deficit,
            "dist2": self.dist2,
            "distp": self.distp,
            "ratio2": self.ratio2,
            "ratiop": self.ratiop,
        }


def _eta12(points) -> np.ndarray:
    x = np.atleast_2d(points)
    return x[:, 0] * x[:, 1]


def quadratic_limit(prm: Params, order: int = 16) -> float:
    """lim deficit / eps^2 for u_eps = lambda(1 + eps eta_1 eta_2).

    (p(p-1)/2) c^p (avg_S phi^2 - (q-1)/(p-1) int_B d^{q-2} Q(phi)^2 / int_B d^q),
    with int_B d^{q-2} Q(phi)^2 = K_prefactor A_2 ||phi||_2^2 and ||phi||_2^2 = |S|/(n(n+2)).
    """
    n, p, q = prm.n, prm.p, prm.q
    phi2 = sphere_area(n) / (n * (n + 2.0))
    avg = phi2 / sphere_area(n)
    second = K_prefactor(prm) * A_l(prm, 2, order) * phi2 / d_q_integral(prm, order)
    return 0.5 * p * (p - 1.0) * c_sharp(prm, order) ** p * (avg - (q - 1.0) / (p - 1.0) * second)


def _family_member(prm: Params, family: str, eps: float, shift_radius: float):
    n = prm.n
    if family == "quadratic":
        expansion = HarmonicExpansion.from_dict(
            n, 2, {(0, 1): math.sqrt(sphere_area(n))}
        )
        s = sphere_rule(n, 8)
        phi = project(_eta12, 2, s)
        coeffs = expansion.coeffs + eps * phi.coeffs
        return HarmonicExpansion(n, 2, coeffs)
    if family == "orbit-shift":
        xi = np.zeros(n)
        xi[0] = shift_radius
        m = MobiusMap(xi)
        return lambda pts: 1.0 + eps * m.jacobians(np.atleast_2d(pts))[1] ** (1.0 / prm.p)
    if family == "dual":
        return lambda pts: tilde_one_points(prm, pts) + eps * _eta12(pts)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def optimality_sweep(
    prm: Params,
    family: str,
    eps_list: Sequence[float],
    config: StabilityConfig | None = None,
    shift_radius: float = 0.9,
) -> list[SweepRow]:
    """Rows (eps, deficit, dist^2, dist^e, deficit/dist^2, deficit/dist^e).

    dist is the plain L^p distance (primal families, e = p) or the L^{q'}
    distance to 1~ (dual family, e = q'). Members are normalized to unit
    norm; the deficits are scale invariant. eps = 0 gives zero deficit and distance up to rounding.
    """
    config = config or StabilityConfig.for_dimension(prm.n)
    prm.require_valid()
    rows = []
    for eps in eps_list:
        eps = float(eps)
        member = _family_member(prm, family, eps, shift_radius)
        if family == "dual":
            rep = distance_dual(prm, member, config, power=1.0)
            expo = prm.q_prime
        else:
            rep = distance_primal(prm, member, "lp", config)
            expo = prm.p
        deficit, dist = rep.deficit, rep.distance
        d2, dp = dist**2, dist**expo
        r2 = deficit / d2 if d2 > 0 else math.nan
        rp = deficit / dp if dp > 0 else math.nan
        rows.append(SweepRow(eps, deficit, d2, dp, r2, rp, rep.flagged))
    return rows
