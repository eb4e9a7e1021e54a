import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from confext.conformal import (
    act_ball,
    act_boundary,
    halfspace_ball,
    random_mobius,
    transfer_ball,
    transfer_boundary,
)
from confext.harmonics import HarmonicExpansion, basis
from confext.operators import (
    BallField,
    UnsupportedCase,
    apply_Q,
    apply_Q_quadrature,
    apply_S,
    boundary_limit_check,
    d_closed,
    d_q_integral,
    evaluate_Q,
    extension_E,
    kernel_H,
    matched_ball_rule,
    phi_l,
    tilde_d,
    tilde_one,
    tilde_one_field,
    w_l_closed,
    w_l_funk_hecke,
)
from confext.params import Params
from confext.quadrature import ball_volume, sphere_area, sphere_rule
from confext.specfun import DomainError

SIX_PAIRS = [(0.0, 1.0), (0.5, 0.6), (0.5, 0.3), (1.0, 0.5), (1.5, 0.0), (-0.3, 1.4)]


def _gauss(y):
    return np.exp(-np.sum(np.atleast_2d(y) ** 2, axis=1) / (2 * 0.3**2))


def test_kernel_examples():
    prm = Params(3, 0.0, 1.0)
    assert kernel_H(prm, np.zeros(3), np.array([1.0, 0, 0])) == pytest.approx(0.5)
    xi, eta = np.array([0.5, 0, 0]), np.array([0, 1.0, 0])
    assert kernel_H(prm, xi, eta) == pytest.approx(0.375 * 1.25 ** (-1.5), rel=1e-14)
    with pytest.raises(DomainError):
        kernel_H(prm, np.array([1.0, 0, 0]), eta)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_d_at_the_harmonic_pair(n):
    prm = Params(n, 0.0, 1.0)
    r = np.linspace(0, 0.99, 7)
    np.testing.assert_allclose(d_closed(prm, r), math.pi ** (n / 2) / math.gamma(n / 2), rtol=1e-14)


@pytest.mark.parametrize("pair", SIX_PAIRS)
def test_d_matches_sphere_quadrature(pair):
    prm = Params(3, *pair)
    s = sphere_rule(3, 120)
    xi = np.array([0.6, 0.0, 0.0])
    brute = s.integrate(lambda e: kernel_H(prm, xi, e))
    assert brute == pytest.approx(d_closed(prm, 0.6), rel=1e-9)


def test_phi_examples():
    prm = Params(3, 0.0, 1.0)
    for l in range(5):
        np.testing.assert_allclose(phi_l(prm, l, np.array([0.0, 0.3, 0.9])), math.gamma(l + 1.5) / math.gamma(l + 1.5))
    prm = Params(4, 0.5, 0.6)
    t = np.array([0.0, 0.2, 0.7])
    pref = math.pi ** 2 * 2 ** (1 - 0.6) / math.gamma(2)
    lhs = d_closed(prm, np.sqrt(t))
    rhs = (2 ** (1 - 0.6) * math.pi**2 / math.gamma(1.75)) * (1 - t) ** 0.1 * phi_l(prm, 0, t)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-13)
    assert d_closed(prm, 0.0) == pytest.approx(pref, rel=1e-14)
    with pytest.raises(DomainError):
        phi_l(Params(3, 1.5, 0.0), 0, 1.0)


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("pair", SIX_PAIRS)
def test_w0_equals_d(n, pair):
    prm = Params(n, *pair)
    r = np.linspace(0.0, 0.999, 25)
    np.testing.assert_allclose(w_l_closed(prm, 0, r), d_closed(prm, r), rtol=1e-12)


@pytest.mark.parametrize("pair", SIX_PAIRS)
def test_w_l_positive_and_decreasing(pair):
    prm = Params(3, *pair)
    r = np.linspace(0.05, 0.98, 10)
    prev = w_l_closed(prm, 0, r)
    assert np.all(prev > 0)
    for l in range(1, 12):
        cur = w_l_closed(prm, l, r)
        assert np.all(cur > 0) and np.all(cur < prev)
        prev = cur


def test_w_l_closed_vs_funk_hecke():
    prm = Params(3, 0.5, 0.6)
    assert w_l_funk_hecke(prm, 3, 0.4) == pytest.approx(w_l_closed(prm, 3, 0.4), rel=1e-6)
    for l, r in [(0, 0.9), (1, 0.99), (7, 0.999), (2, 0.0)]:
        for pair in [(0.5, 0.3), (1.0, 0.5), (1.5, 0.0)]:
            p = Params(4, *pair)
            assert w_l_funk_hecke(p, l, r) == pytest.approx(w_l_closed(p, l, r), rel=1e-8, abs=1e-14)


@pytest.mark.parametrize("pair", [(0.3, 0.5), (0.5, 0.3), (1.5, 0.0), (2.0, 0.2)])
def test_d_boundary_exponent(pair):
    prm = Params(3, *pair)
    r = 1 - np.logspace(-2, -4, 9)
    slope = np.polyfit(np.log(1 - r), np.log(d_closed(prm, r)), 1)[0]
    assert abs(slope - prm.radial_power) <= 0.05


def test_apply_Q_of_constant_is_d():
    prm = Params(3, 0.5, 0.6)
    rule = matched_ball_rule(prm, order=8, resolution=8)
    one = HarmonicExpansion.constant(3)
    field = apply_Q(prm, one, rule)
    inner = rule.radial.complement > 1e-4
    vals = field.grid_values().reshape(len(rule.radial), -1)[inner]
    np.testing.assert_allclose(vals, d_closed(prm, rule.radii[inner])[:, None] + 0 * vals, rtol=1e-10)
    pts = np.array([[0.1, 0.2, 0.3], [0.0, 0.0, 0.0], [0.5, -0.5, 0.5]])
    np.testing.assert_allclose(evaluate_Q(prm, one, pts), d_closed(prm, np.linalg.norm(pts, axis=1)), rtol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_spectral_Q_matches_quadrature(n):
    # six admissible pairs per dimension, every basis harmonic up to degree 4
    b = basis(n, 4)
    rng = np.random.default_rng(n)
    pts = rng.normal(size=(4, n))
    pts *= (rng.uniform(0.05, 0.7, size=4) / np.linalg.norm(pts, axis=1))[:, None]
    for pair in SIX_PAIRS:
        prm = Params(n, *pair)
        brute = apply_Q_quadrature(prm, b.evaluate, pts)
        spectral = np.stack([evaluate_Q(prm, HarmonicExpansion(n, 4, e), pts) for e in np.eye(b.size)], axis=1)
        assert np.max(np.abs(brute - spectral) / np.abs(spectral).max()) <= 1e-6


def test_Q_conformal_covariance():
    prm = Params(3, 0.5, 0.6)
    rng = np.random.default_rng(3)
    u = HarmonicExpansion(3, 2, rng.normal(size=basis(3, 2).size))
    pts = rng.uniform(-0.4, 0.4, size=(5, 3))
    for _ in range(3):
        m = random_mobius(3, rng, max_radius=0.5)
        lhs = apply_Q_quadrature(prm, act_boundary(u, m, prm.p), pts, polar_nodes=160, resolution=40)
        rhs = act_ball(lambda x: evaluate_Q(prm, u, x), m, prm.q, pts)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-6)


def test_apply_S_of_radial_input_is_degree_zero():
    prm = Params(3, 0.5, 0.6)
    rule = matched_ball_rule(prm, order=8, resolution=8)
    v = BallField.from_function(prm, lambda x: np.exp(-np.sum(x**2, axis=1)), 2, rule)
    out = apply_S(prm, v)
    assert abs(out.coeffs[0]) > 0
    np.testing.assert_allclose(out.coeffs[1:], 0.0, atol=1e-12 * abs(out.coeffs[0]))


@pytest.mark.parametrize("trip", [(3, 0.5, 0.6), (4, -0.3, 1.4), (3, 1.5, 0.0), (5, 1.0, 0.5)])
def test_S_of_tilde_one_is_tilde_d(trip):
    prm = Params(*trip)
    rule = matched_ball_rule(prm, order=16, resolution=4, levels=24)
    s1 = apply_S(prm, tilde_one_field(prm, rule))
    value = s1.coeffs[0] / math.sqrt(sphere_area(prm.n))
    assert value == pytest.approx(tilde_d(prm), rel=1e-7)


def test_tilde_one_at_harmonic_pair_and_normalization():
    prm = Params(3, 0.0, 1.0)
    np.testing.assert_allclose(tilde_one(prm, np.array([0.0, 0.5, 0.9])), 1.0, rtol=1e-12)
    for trip in [(3, 0.5, 0.6), (4, 1.5, 0.0), (5, -0.3, 1.4), (3, 1.0, 0.5)]:
        prm = Params(*trip)
        f = lambda r: tilde_one(prm, r) ** prm.q_prime * r ** (prm.n - 1)  # noqa: E731
        edges = 1 - np.logspace(-1, -14, 27)
        total = quad(f, 0, edges[0], epsabs=0, epsrel=1e-13)[0]
        total += sum(quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
        total *= sphere_area(prm.n)
        assert total == pytest.approx(ball_volume(prm.n), rel=1e-9)


def test_duality_against_funk_hecke_route():
    prm = Params(3, 0.5, 0.6)
    n = prm.n
    rule = matched_ball_rule(prm, order=16, resolution=4, levels=24)
    u = HarmonicExpansion.single(n, 2, 1)
    v = BallField.from_profiles(prm, 2, rule, {(2, 1): lambda r: r**2})
    lhs = apply_S(prm, v).coeffs[basis(n, 2).position(2, 1)]
    qu = apply_Q(prm, u, rule)
    rhs_spectral = float(np.sum(qu.modes * v.modes @ rule.radial_weights))
    # <Q u, v>_B with w_2 from the adaptive Funk-Hecke integral
    g = lambda r: r**2 * w_l_funk_hecke(prm, 2, r, rtol=1e-10) * r ** (n - 1)  # noqa: E731
    # the tail beyond 1 - 1e-12 contributes below 1e-13 relative
    edges = [0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 1.0 - 1e-7, 1.0 - 1e-12]
    rhs = sum(quad(g, a, b, epsabs=0, epsrel=1e-11, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
    assert lhs == pytest.approx(rhs, rel=1e-7)
    assert rhs_spectral == pytest.approx(lhs, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31), pair=st.sampled_from(SIX_PAIRS), n=st.integers(3, 5))
def test_duality_random_low_degree(seed, pair, n):
    prm = Params(n, *pair)
    rng = np.random.default_rng(seed)
    L = 3
    rule = matched_ball_rule(prm, order=12, resolution=6, levels=20)
    u = HarmonicExpansion(n, L, rng.normal(size=basis(n, L).size))
    profiles = {}
    for key in basis(n, L).index:
        c = rng.normal(size=3)
        profiles[key] = lambda r, c=c, l=key[0]: r**l * (c[0] + c[1] * r**2 + c[2] * r**4)
    v = BallField.from_profiles(prm, L, rule, profiles)
    lhs = float(u.coeffs @ apply_S(prm, v).coeffs)
    rhs = float(np.sum(apply_Q(prm, u, rule).modes * v.modes @ rule.radial_weights))
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-12)


def test_d_q_integral_at_harmonic_pair():
    for n in [3, 4, 5]:
        prm = Params(n, 0.0, 1.0)
        d = math.pi ** (n / 2) / math.gamma(n / 2)
        assert d_q_integral(prm) == pytest.approx(d**prm.q * ball_volume(n), rel=1e-13)


# -------------------------------------------------------------- half-space E


def test_E_routes_agree():
    for trip in [(3, 0.3, 0.5), (3, 0.0, 1.0), (4, 0.3, 0.5), (3, 1.0, 0.5), (3, 1.5, 0.0)]:
        prm = Params(*trip)
        x = np.array([0.1] * (prm.n - 2) + [0.05, 0.4])
        tensor = extension_E(prm, _gauss, x, 3.0, "tensor", nodes=96)
        polar = extension_E(prm, _gauss, x, 3.0, "polar")
        assert tensor == pytest.approx(polar, rel=1e-8)


def test_E_of_zero_is_zero():
    prm = Params(3, 0.3, 0.5)
    zero = lambda y: np.zeros(len(np.atleast_2d(y)))  # noqa: E731
    assert extension_E(prm, zero, np.array([0.2, 0.1, 0.3]), 1.0) == 0.0
    assert extension_E(prm, zero, np.array([0.2, 0.1, 0.3]), 1.0, "polar") == 0.0


@pytest.mark.parametrize("n", [3, 4])
def test_E_boundary_limit_harmonic_pair(n):
    prm = Params(n, 0.0, 1.0)
    res = boundary_limit_check(prm, _gauss, np.full(n - 1, 0.05), 3.0)
    assert res.stated_constant == pytest.approx(sphere_area(n) / 2, rel=1e-14)
    assert abs(res.ratio_stated - 1) <= 0.01


def test_E_boundary_limit_fractional_alpha():
    prm = Params(3, 0.3, 0.5)
    res = boundary_limit_check(prm, _gauss, np.array([0.1, 0.05]), 3.0, xn_values=(2e-3, 1e-3))
    expected = math.pi * math.gamma(0.35) / math.gamma(1.35)
    assert res.stated_constant == pytest.approx(expected, rel=1e-14)
    assert abs(res.ratio_stated - 1) <= 0.05
    assert abs(res.extrapolated / expected - 1) <= 1e-3


def test_E_boundary_limit_alpha_one_reports_both_constants():
    prm = Params(3, 1.0, 0.5)
    res = boundary_limit_check(prm, _gauss, np.array([0.1, 0.05]), 3.0)
    assert res.derived_constant == pytest.approx(2 * math.pi)
    assert res.stated_constant == pytest.approx(4 * math.pi)
    assert abs(res.extrapolated / res.derived_constant - 1) <= 1e-3
    assert res.ratio_derived == pytest.approx(2 * res.ratio_stated)


def test_E_boundary_limit_rejects_alpha_above_one():
    with pytest.raises(UnsupportedCase):
        boundary_limit_check(Params(3, 1.5, 0.0), _gauss, np.zeros(2), 3.0)


def test_E_matches_Q_through_the_halfspace_transfer():
    # Q of the transferred boundary datum equals the transferred extension
    prm = Params(3, 0.3, 0.5)
    x = np.array([0.1, -0.2, 0.4])
    u = transfer_boundary(_gauss, prm.alpha)
    xi = halfspace_ball(x)[None, :]
    qu = apply_Q_quadrature(prm, u, xi, polar_nodes=200, resolution=60)[0]
    e_of_f = lambda pts: np.array([extension_E(prm, _gauss, p, 3.0, "polar") for p in np.atleast_2d(pts)])  # noqa: E731
    assert qu == pytest.approx(transfer_ball(e_of_f, prm.alpha, prm.beta)(xi)[0], rel=1e-6)
