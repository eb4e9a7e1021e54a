"""Named check suites with uniform reporting, and deterministic grid sweeps.

Every check records (name, lhs, rhs, margin, tol, passed) plus the formula it
tests. Senses:

    rel     |lhs - rhs| / |rhs| <= tol, margin = tol - relative error
    abs     |lhs - rhs| <= tol,         margin = tol - absolute error
    gt      lhs > rhs,                  margin = lhs - rhs
    lt      lhs < rhs,                  margin = rhs - lhs
    report  always passes; records a value that has no asserted target
"""

from __future__ import annotations

import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import constants as C
from . import stability as S
from .conformal import act_ball, act_boundary, random_mobius
from .harmonics import HarmonicExpansion, basis, kernel_moment_identity
from .operators import (
    BallField,
    UnsupportedCase,
    apply_Q,
    apply_Q_quadrature,
    apply_S,
    boundary_limit_check,
    d_closed,
    d_q_integral,
    evaluate_Q,
    matched_ball_rule,
    tilde_d,
    tilde_one_field,
    w_l_closed,
    w_l_funk_hecke,
)
from .params import InvalidParams, Params
from .quadrature import sphere_area, sphere_rule
from .specfun import contiguous_residuals, gamma_ratio

__all__ = [
    "TOLERANCES",
    "SUITES",
    "Check",
    "VerificationReport",
    "VerifierConfig",
    "run_suite",
    "sweep_grid",
]

# single source of truth for check tolerances
TOLERANCES = {
    "identity": 1e-9,
    "quadrature": 1e-6,
    "fit": 0.1,
    "optimizer": 1e-5,
}

SUITES = ("identities", "monotone", "gap", "dual", "decay", "conformal", "boundary", "stability")
SENSES = ("rel", "abs", "gt", "lt", "report")


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    margin: float
    tol: float
    passed: bool
    anchor: str
    sense: str
    diagnostic: str = ""

    def record(self, suite: str) -> dict:
        return {
            "suite": suite,
            "check": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tol": self.tol,
            "passed": self.passed,
        }


def make_check(name: str, lhs: float, rhs: float, sense: str, anchor: str, tol: float = 0.0, diagnostic: str = "") -> Check:
    if sense not in SENSES:
        raise ValueError(f"unknown sense {sense!r}")
    lhs, rhs = float(lhs), float(rhs)
    if sense == "rel":
        margin = tol - abs(lhs - rhs) / abs(rhs) if rhs != 0.0 else tol - abs(lhs)
        passed = margin >= 0.0
    elif sense == "abs":
        margin = tol - abs(lhs - rhs)
        passed = margin >= 0.0
    elif sense == "gt":
        margin = lhs - rhs
        passed = margin > 0.0
    elif sense == "lt":
        margin = rhs - lhs
        passed = margin > 0.0
    else:
        margin = lhs - rhs
        passed = True
    if not (math.isfinite(lhs) and math.isfinite(rhs)) and sense != "report":
        passed = False
        diagnostic = diagnostic or "non-finite value"
    return Check(name, lhs, rhs, float(margin), float(tol), bool(passed), anchor, sense, diagnostic)


def failed_check(name: str, exc: BaseException) -> Check:
    msg = f"{type(exc).__name__}: {exc}"
    return Check(name, math.nan, math.nan, math.nan, 0.0, False, "numerical failure", "abs", msg)


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    params: Params
    checks: tuple[Check, ...]
    wall_time: float
    invalid: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def records(self) -> list[dict]:
        return [c.record(self.suite) for c in self.checks]


@dataclass(frozen=True)
class VerifierConfig:
    """Resolution settings; reports are pure functions of (params, suite, config)."""

    radial_order: int = C.RADIAL_ORDER
    l_max: int = 200
    n_maps: int = 20
    covariance_maps: int = 3
    seed: int = 20240611
    stability: S.StabilityConfig | None = None

    def __post_init__(self):
        if self.radial_order < 2:
            raise ValueError("radial_order must be at least 2")
        if self.l_max < 50:
            raise ValueError("l_max must be at least 50")

    def stability_for(self, n: int) -> S.StabilityConfig:
        return self.stability or S.StabilityConfig.for_dimension(n)


def _sphere_resolution(n: int) -> int:
    """Sphere rule degree for norm checks; pushed data integrate to about 1e-8."""
    return {3: 60, 4: 40}.get(n, 20)


def _ball_sphere_resolution(n: int) -> int:
    """Angular degree of the ball rule in the norm checks."""
    return {3: 40, 4: 16}.get(n, 12)


# ------------------------------------------------------------------ suites


def _identities(prm: Params, cfg: VerifierConfig) -> list[Check]:
    tol_i, tol_q = TOLERANCES["identity"], TOLERANCES["quadrature"]
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(200):
        a, b = rng.uniform(-3, 3, size=2)
        c = rng.uniform(0.5, 6)
        z = rng.uniform(0, 0.95)
        worst = max(worst, *contiguous_residuals(a, b, c, z))
    out = [make_check("contiguous_relations", worst, 0.0, "abs", "Gauss contiguous relations for 2F1", tol_i)]
    z = 3.7
    dup = gamma_ratio((z, z + 0.5), (2 * z,)) * 2 ** (2 * z - 1) / math.sqrt(math.pi)
    out.append(make_check("gamma_duplication", dup, 1.0, "rel", "Gamma(2z) = 2^{2z-1} Gamma(z) Gamma(z+1/2) / sqrt(pi)", tol_i))
    worst = 0.0
    for _ in range(50):
        mu, nu, r = rng.uniform(0.1, 3.0), rng.uniform(0.1, 3.0), rng.uniform(0.0, 0.9)
        lhs, rhs = kernel_moment_identity(mu, nu, r)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    out.append(
        make_check("kernel_moment_identity", worst, 0.0, "abs", "int (1+r^2-2rs)^{-mu}(1-s^2)^{nu-1/2} = B(1/2,nu+1/2) F(mu,mu-nu;nu+1;r^2)", 1e-8)
    )
    radii = np.array([0.0, 0.3, 0.6, 0.85])
    pts = np.outer(radii, np.eye(prm.n)[0])
    quad = apply_Q_quadrature(prm, lambda e: np.ones(len(e)), pts, polar_nodes=160, resolution=12)
    closed = d_closed(prm, radii)
    err = float(np.max(np.abs(quad - closed) / np.abs(closed)))
    out.append(make_check("d_quadrature_vs_closed_form", err, 0.0, "abs", "Q(1) = d by kernel quadrature and by the hypergeometric closed form", tol_q))
    lhs = C.c_sharp(prm, cfg.radial_order) ** prm.p * sphere_area(prm.n)
    rhs = d_q_integral(prm, cfg.radial_order) ** (prm.p / prm.q)
    out.append(make_check("sharp_constant_definition", lhs, rhs, "rel", "c^p |S^{n-1}| = ||d||_q^p", tol_i))
    if prm.alpha == 0.0 and prm.beta == 1.0:
        cf = C.harmonic_pair_closed_forms(prm.n)
        out.append(make_check("c_sharp_closed_form", C.c_sharp(prm, cfg.radial_order), cf["c_sharp"], "rel", "c = n^{-(n-2)/(2n)} |S^{n-1}|^{1-(n-2)/(2n(n-1))} / 2", 1e-10))
        out.append(make_check("K_inv_closed_form", C.K_inv(prm, cfg.radial_order), cf["K_inv"], "rel", "K^{-1} = |S^{n-1}|^2 d^{q-2} / (4(n+4))", 1e-10))
    return out


def _monotone(prm: Params, cfg: VerifierConfig) -> list[Check]:
    A = C.A_table(prm, 21, cfg.radial_order)
    out = [
        make_check("A_l_positive", float(A.min()), 0.0, "gt", "A_l > 0"),
        make_check("A_l_decreasing", float(np.max(A[1:] / A[:-1])), 1.0, "lt", "A_{l+1} < A_l for l <= 20"),
    ]
    r = np.linspace(0.05, 0.95, 10)
    w = np.array([w_l_closed(prm, l, r) for l in range(22)])
    out.append(make_check("w_l_positive", float(w.min()), 0.0, "gt", "w_l(r) > 0"))
    out.append(make_check("w_l_decreasing", float(np.max(w[1:] / w[:-1])), 1.0, "lt", "w_{l+1}(r) < w_l(r) at 10 radii"))
    fh = w_l_funk_hecke(prm, 3, 0.4)
    out.append(make_check("w_l_funk_hecke_vs_closed", fh, float(w_l_closed(prm, 3, 0.4)), "rel", "Funk-Hecke eigenvalue of H equals w_l", TOLERANCES["quadrature"]))
    return out


def _gap(prm: Params, cfg: VerifierConfig) -> list[Check]:
    g = C.gap_check(prm, cfg.radial_order)
    anchor = "K^{-1} < (p-1)/(q-1) int_B d^q / |S^{n-1}|"
    return [
        make_check("gap_inequality", g.K_inv, g.rhs, "lt", anchor),
        make_check("A2_below_A1", C.A_l(prm, 2, cfg.radial_order), C.A_l(prm, 1, cfg.radial_order), "lt", "A_2 < A_1"),
        make_check("A1_route_equality", g.A1_lhs, g.rhs, "rel", "degree-one modes attain the gap bound", TOLERANCES["quadrature"]),
    ]


def _dual(prm: Params, cfg: VerifierConfig) -> list[Check]:
    g = S.dual_gap_check(prm, cfg.radial_order)
    out = [
        make_check("dual_gap_inequality", g.lhs_bracket, g.rhs, "lt", "max(I_2, I_1 - M^2/R) < (q'-1)/(p'-1) d~^2 |S^{n-1}|/|B^n|"),
        make_check("dual_first_moment", g.first_moment, 0.0, "gt", "int w_1 r^n 1~^{2-q'} dr > 0"),
        # equality at the harmonic pair, where w_1 is proportional to r
        make_check("dual_cauchy_schwarz", g.subtracted, g.I1 * (1.0 + TOLERANCES["identity"]), "lt", "M^2/R <= I_1"),
    ]
    rng = np.random.default_rng(cfg.seed + 1)
    phi = HarmonicExpansion(prm.n, 3, rng.normal(size=basis(prm.n, 3).size))
    r1, r2 = S.variation_checks(prm, phi, config=cfg.stability_for(prm.n))
    out.append(make_check("first_variation_primal", r1, 0.0, "abs", "int d^{q-1} Q(phi) / int d^q = avg_S phi", TOLERANCES["identity"]))
    out.append(make_check("first_variation_dual", r2, 0.0, "abs", "avg_B psi 1~^{q'-1} = avg_S S(psi) / S(1~)", TOLERANCES["identity"]))
    rule = matched_ball_rule(prm, cfg.radial_order, 4, 24)
    s1 = apply_S(prm, tilde_one_field(prm, rule)).coeffs[0] / math.sqrt(sphere_area(prm.n))
    out.append(make_check("S_of_tilde_one", s1, tilde_d(prm, cfg.radial_order), "rel", "S(1~) = d~", TOLERANCES["quadrature"]))
    # duality <Q u, v>_B = <u, S v>_S on low degrees
    rule = matched_ball_rule(prm, cfg.radial_order, 12, 24)
    u = HarmonicExpansion(prm.n, 3, rng.normal(size=basis(prm.n, 3).size))
    vfun = lambda x: np.exp(-np.sum(x * x, axis=1)) * (1.0 + x[:, 0] - x[:, 1] * x[:, 0])  # noqa: E731
    v = BallField.from_function(prm, vfun, 3, rule)
    lhs = rule.integrate(apply_Q(prm, u, rule).grid_values() * vfun(rule.points))
    rhs = float(u.coeffs @ apply_S(prm, v).coeffs)
    out.append(make_check("duality_identity", lhs, rhs, "rel", "int_B Q(u) v = int_S u S(v)", 1e-7))
    return out


def _decay(prm: Params, cfg: VerifierConfig) -> list[Check]:
    fit = C.decay_fit(prm, cfg.l_max, cfg.radial_order)
    tol = TOLERANCES["fit"] + (C.ALPHA_ONE_SLACK if prm.regime == "eq1" else 0.0)
    anchor = {
        "lt1": "log A_l ~ -(1 + q(alpha+beta-1)) log l",
        "eq1": "log A_l ~ -(1 + q beta) log l, log log correction, slack 0.05",
        "gt1": "log A_l ~ -(1 + q beta) log l",
    }[prm.regime]
    out = [make_check("decay_slope", fit.slope, fit.target, "abs", anchor, tol)]
    if prm.regime == "gt1":
        sharp = fit.target - 2.0 * (prm.alpha - 1.0)
        out.append(make_check("decay_upper_bound", fit.slope, fit.target + tol, "lt", "slope <= -(1 + q beta)"))
        out.append(make_check("decay_sharp_rate", fit.slope, sharp, "abs", "log A_l ~ -(1 + q beta + 2(alpha-1)) log l", tol))
    return out


def _conformal(prm: Params, cfg: VerifierConfig) -> list[Check]:
    tol = TOLERANCES["optimizer"]
    rng = np.random.default_rng(cfg.seed + 2)
    res = _sphere_resolution(prm.n)
    s = sphere_rule(prm.n, res)
    brule = matched_ball_rule(prm, cfg.radial_order, _ball_sphere_resolution(prm.n), 24)
    u = HarmonicExpansion(prm.n, 2, rng.normal(size=basis(prm.n, 2).size))
    # smooth positive datum: |u|^p has kinks at sign changes of u when p < 2
    upos = lambda x: np.exp(0.2 * u(x))  # noqa: E731
    up = s.integrate(upos(s.points) ** prm.p)
    vfun = lambda x: np.exp(-np.sum(x * x, axis=1)) * (1.0 + 0.5 * x[:, 0])  # noqa: E731
    vq = brule.integrate(np.abs(vfun(brule.points)) ** prm.q_prime)
    worst_s = worst_b = 0.0
    for _ in range(cfg.n_maps):
        m = random_mobius(prm.n, rng, max_radius=0.3)
        worst_s = max(worst_s, abs(s.integrate(act_boundary(upos, m, prm.p, s.points) ** prm.p) / up - 1.0))
        worst_b = max(worst_b, abs(brule.integrate(np.abs(act_ball(vfun, m, prm.q_prime, brule.points)) ** prm.q_prime) / vq - 1.0))
    out = [
        make_check("boundary_norm_invariance", worst_s, 0.0, "abs", "||u_Psi||_p = ||u||_p", tol),
        make_check("ball_norm_invariance", worst_b, 0.0, "abs", "||v_Psi||_{q'} = ||v||_{q'}", tol),
    ]
    pts = rng.uniform(-0.35, 0.35, size=(4, prm.n))
    worst = 0.0
    for _ in range(cfg.covariance_maps):
        m = random_mobius(prm.n, rng, max_radius=0.4)
        lhs = apply_Q_quadrature(prm, act_boundary(u, m, prm.p), pts, polar_nodes=160, resolution=40)
        rhs = act_ball(lambda x: evaluate_Q(prm, u, x), m, prm.q, pts)
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300))))
    out.append(make_check("Q_covariance", worst, 0.0, "abs", "Q(u_Psi) = (Q u)_Psi", tol))
    return out


def _bump(y):
    return np.exp(-np.sum(np.atleast_2d(y) ** 2, axis=1) / (2 * 0.3**2))


def _boundary(prm: Params, cfg: VerifierConfig) -> list[Check]:
    xp = np.full(prm.n - 1, 0.05)
    if prm.alpha > 1.0:
        try:
            boundary_limit_check(prm, _bump, xp, 3.0)
        except UnsupportedCase as exc:
            return [Check("boundary_limit_unsupported", math.nan, math.nan, math.nan, 0.0, True, "alpha > 1 limit not covered", "report", str(exc))]
    if prm.alpha < 1.0:
        # the scaled error decays like x_n^{1-alpha}; hold it at the alpha = 0.3, x_n = 1e-3 level
        h = min(1e-3, 1e-3 ** (0.7 / (1.0 - prm.alpha)))
        res = boundary_limit_check(prm, _bump, xp, 3.0, (4 * h, 2 * h, h))
        tol = 0.01 if (prm.alpha == 0.0 and prm.beta == 1.0) else 0.05
        anchor = "x_n^{1-alpha-beta} E(f) -> pi^{(n-1)/2} Gamma((1-alpha)/2)/Gamma((n-alpha)/2) f"
        return [
            make_check("boundary_limit_ratio", res.ratio_stated, 1.0, "abs", anchor, tol),
            make_check("boundary_limit_richardson", res.extrapolated, res.stated_constant, "rel", "Richardson-extrapolated scaled limit", 1e-3),
        ]
    res = boundary_limit_check(prm, _bump, xp, 3.0)
    return [
        make_check("boundary_limit_derived_constant", res.extrapolated, res.derived_constant, "rel", "-x_n^{-beta} E(f)/log x_n -> |S^{n-2}| f", 1e-3),
        make_check("boundary_limit_stated_ratio", res.ratio_stated, 1.0, "report", "ratio to |S^{n-1}|"),
    ]


def _stability(prm: Params, cfg: VerifierConfig) -> list[Check]:
    st = cfg.stability_for(prm.n)
    grid = np.round(np.arange(-10.0, 10.0 + 5e-4, 1e-3), 10)
    worst, cmin = math.inf, math.inf
    for r in (1.2, 1.5, 2.0, 3.0, 4.0):
        for kappa in (0.1, 0.5):
            worst = min(worst, float(np.min(S.fz_check(S.FZParams(r, kappa, grid)))))
            cmin = min(cmin, S.estimate_c_kappa(r, kappa, grid))
    out = [
        make_check("fz_residual_min", worst, -1e-12, "gt", "scalar inequality with c_kappa dropped"),
        make_check("fz_c_kappa_min", cmin, 0.0, "gt", "estimated c_kappa > 0 in every cell"),
    ]
    rn = np.min([float(np.min(S.fz_nonnegativity(r, grid))) for r in (1.2, 1.5)])
    out.append(make_check("fz_quadratic_part_min", rn, -1e-12, "gt", "a^2 + (r-2) zeta(a)(1-|1+a|)^2 >= 0 for r < 2"))
    c_p = C.c_sharp(prm, st.radial_order) ** prm.p
    out.append(make_check("deficit_of_constant", S.deficit_primal(prm, HarmonicExpansion.constant(prm.n), st), 0.0, "abs", "deficit(1) = 0", 1e-8 * max(1.0, c_p)))
    dual0 = S.deficit_dual(prm, lambda x: S.tilde_one_points(prm, x), st)
    out.append(make_check("dual_deficit_of_tilde_one", dual0, 0.0, "abs", "dual deficit(1~) = 0", 1e-7))
    eps = [0.1, 0.05, 0.025]
    rows = S.optimality_sweep(prm, "quadratic", eps, st)
    d = np.array([r.deficit for r in rows])
    slope = float(np.polyfit(np.log(eps), np.log(d), 1)[0]) if np.all(d > 0) else math.nan
    out.append(make_check("quadratic_deficit_exponent", slope, 2.0, "abs", "deficit ~ eps^2", TOLERANCES["fit"]))
    dist = np.sqrt([r.dist2 for r in rows])
    dslope = float(np.polyfit(np.log(eps), np.log(dist), 1)[0])
    out.append(make_check("quadratic_distance_exponent", dslope, 1.0, "abs", "distance ~ eps", TOLERANCES["fit"]))
    ratios = np.array([r.ratio2 for r in rows])
    out.append(make_check("quadratic_ratio_variation", float(ratios.max() / ratios.min()), 2.0, "lt", "deficit/distance^2 varies by at most x2"))
    out.append(make_check("quadratic_second_variation", float(d[-1] / eps[-1] ** 2), S.quadratic_limit(prm, st.radial_order), "rel", "deficit/eps^2 -> second variation from A_2", 0.05))
    return out


_SUITE_FUNCS: dict[str, Callable[[Params, VerifierConfig], list[Check]]] = {
    "identities": _identities,
    "monotone": _monotone,
    "gap": _gap,
    "dual": _dual,
    "decay": _decay,
    "conformal": _conformal,
    "boundary": _boundary,
    "stability": _stability,
}


def _run_one(prm: Params, suite: str, cfg: VerifierConfig) -> list[Check]:
    try:
        return _SUITE_FUNCS[suite](prm, cfg)
    except (ArithmeticError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return [failed_check(f"{suite}_error", exc)]


def run_suite(prm: Params, suite: str = "all", config: VerifierConfig | None = None) -> VerificationReport:
    """Run one named suite (or ``all``). Invalid parameters raise InvalidParams naming the clause."""
    cfg = config or VerifierConfig()
    if suite != "all" and suite not in _SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    prm.require_valid()
    start = time.perf_counter()
    checks: list[Check] = []
    for name in SUITES if suite == "all" else (suite,):
        checks.extend(replace(c, name=f"{name}.{c.name}") if suite == "all" else c for c in _run_one(prm, name, cfg))
    return VerificationReport(suite, prm, tuple(checks), time.perf_counter() - start)


def _grid_row(task: tuple[tuple, str, VerifierConfig]) -> VerificationReport:
    trip, suite, cfg = task
    start = time.perf_counter()
    try:
        prm = Params(*trip)
    except (TypeError, ValueError) as exc:
        return VerificationReport(suite, trip, (failed_check("validation", exc),), 0.0, invalid=True)
    try:
        return run_suite(prm, suite, cfg)
    except InvalidParams as exc:
        chk = Check("validation", math.nan, math.nan, math.nan, 0.0, False, "parameter validity", "abs", f"violates {exc.clause}")
        return VerificationReport(suite, prm, (chk,), time.perf_counter() - start, invalid=True)
    except Exception as exc:  # per-row isolation
        chk = failed_check("error", exc)
        chk = replace(chk, diagnostic=chk.diagnostic + "\n" + traceback.format_exc(limit=3))
        return VerificationReport(suite, prm, (chk,), time.perf_counter() - start)


def sweep_grid(
    grid: Iterable[tuple[int, float, float]] | None = None,
    suite: str = "all",
    jobs: int = 1,
    config: VerifierConfig | None = None,
) -> list[VerificationReport]:
    """One report per triple, in input order regardless of scheduling.

    Invalid triples yield a report flagged ``invalid`` with a failed
    ``validation`` check; other rows are unaffected.
    """
    cfg = config or VerifierConfig()
    trips = [tuple(t) for t in (grid if grid is not None else (p.as_tuple() for p in C.VALIDATION_GRID))]
    tasks = [(t, suite, cfg) for t in trips]
    if jobs <= 1 or len(tasks) <= 1:
        return [_grid_row(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_grid_row, tasks, chunksize=1))


def grid_records(reports: Sequence[VerificationReport]) -> list[dict]:
    """Flat rows (n, alpha, beta, suite, check, lhs, rhs, margin, tol, passed); wall times excluded."""
    out = []
    for rep in reports:
        trip = rep.params.as_tuple() if isinstance(rep.params, Params) else tuple(rep.params)
        for rec in rep.records():
            out.append({"n": trip[0], "alpha": trip[1], "beta": trip[2], **rec})
    return out
