import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from confext.conformal import (
    MobiusMap,
    act_ball,
    act_boundary,
    ball_halfspace,
    halfspace_ball,
    jacobians,
    mobius_apply,
    random_mobius,
    transfer_boundary,
)
from confext.quadrature import ball_rule, ball_volume, sphere_area, sphere_rule
from confext.specfun import DomainError


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


ball_vectors = st.lists(st.floats(-0.55, 0.55), min_size=3, max_size=3).map(np.array)


def test_identity_and_base_point():
    m0 = MobiusMap.identity(3)
    pts = np.random.default_rng(0).uniform(-0.5, 0.5, size=(5, 3))
    np.testing.assert_array_equal(m0(pts), pts)
    xi = np.array([0.2, -0.4, 0.1])
    np.testing.assert_allclose(mobius_apply(MobiusMap(xi), xi), 0.0, atol=1e-16)
    np.testing.assert_allclose(MobiusMap(xi)(np.zeros(3)), -xi, atol=1e-16)
    assert jacobians(m0, pts[0]) == (1.0, 1.0)


def test_rejects_points_outside_ball():
    with pytest.raises(DomainError):
        MobiusMap(np.array([0.8, 0.7, 0.0]))
    with pytest.raises(DomainError):
        MobiusMap(np.zeros(3), np.ones((3, 3)))


@settings(max_examples=50, deadline=None)
@given(xi=ball_vectors, seed=st.integers(0, 2**31))
def test_sphere_and_ball_preserved(xi, seed):
    rng = np.random.default_rng(seed)
    m = MobiusMap(xi, random_mobius(3, rng).rotation)
    eta = _unit(rng.normal(size=(8, 3)))
    assert np.max(np.abs(np.linalg.norm(m(eta), axis=1) - 1)) <= 1e-12
    inner = eta * rng.uniform(0, 0.99, size=(8, 1))
    assert np.all(np.linalg.norm(m(inner), axis=1) < 1)


@settings(max_examples=50, deadline=None)
@given(xi=ball_vectors, seed=st.integers(0, 2**31))
def test_inverse_is_group_inverse(xi, seed):
    rng = np.random.default_rng(seed)
    m = MobiusMap(xi, random_mobius(3, rng).rotation)
    pts = rng.uniform(-0.55, 0.55, size=(6, 3))
    np.testing.assert_allclose(m.inverse()(m(pts)), pts, atol=1e-10)
    np.testing.assert_allclose(m(m.inverse()(pts)), pts, atol=1e-10)


@pytest.mark.xfail(strict=True, reason="Psi_xi sends 0 to -xi and xi to 0, so it is not an involution")
def test_literal_involution_claim():
    xi = np.array([0.3, 0.1, -0.2])
    eta = _unit(np.array([[0.2, 0.5, 0.7]]))
    m = MobiusMap(xi)
    np.testing.assert_allclose(m(m(eta)), eta, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(xi=ball_vectors, seed=st.integers(0, 2**31))
def test_reflected_map_is_an_involution(xi, seed):
    eta = _unit(np.random.default_rng(seed).normal(size=(5, 3)))
    m = MobiusMap(xi)
    reflected = lambda p: -m(p)  # noqa: E731
    np.testing.assert_allclose(reflected(reflected(eta)), eta, atol=1e-10)
    np.testing.assert_allclose(MobiusMap(-xi)(m(eta)), eta, atol=1e-10)


def _fd_det(f, x, h=1e-5):
    n = len(x)
    jac = np.empty((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        jac[:, k] = (f(x + e) - f(x - e)) / (2 * h)
    return abs(np.linalg.det(jac))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_ball_jacobian_matches_finite_differences(n):
    rng = np.random.default_rng(n)
    for _ in range(5):
        m = random_mobius(n, rng)
        x = rng.uniform(-0.4, 0.4, size=n)
        assert m.jacobians(x)[0] == pytest.approx(_fd_det(m, x), rel=1e-8)


def test_jacobian_chain_rule_under_composition():
    rng = np.random.default_rng(4)
    for _ in range(10):
        m1, m2 = random_mobius(3, rng), random_mobius(3, rng)
        x = rng.uniform(-0.4, 0.4, size=3)
        composite = lambda p: m1(m2(p))  # noqa: E731
        chain = m1.jacobians(m2(x))[0] * m2.jacobians(x)[0]
        assert _fd_det(composite, x) == pytest.approx(chain, rel=1e-8)


def test_boundary_jacobian_integrates_to_area():
    s = sphere_rule(3, 60)
    m = MobiusMap(np.array([0.3, 0.0, 0.0]))
    assert abs(s.integrate(lambda p: m.jacobians(p)[1]) - sphere_area(3)) <= 1e-8


@pytest.mark.parametrize("n", [3, 4])
def test_ball_jacobian_integrates_to_volume(n):
    rng = np.random.default_rng(9)
    b = ball_rule(n, m=40, resolution=40 if n == 3 else 24)
    m = random_mobius(n, rng, max_radius=0.5)
    assert abs(b.integrate(lambda p: m.jacobians(p)[0]) - ball_volume(n)) <= 1e-6


def test_boundary_action_identity_and_constant():
    s = sphere_rule(3, 10)
    u = lambda p: np.exp(p[:, 0])  # noqa: E731
    np.testing.assert_allclose(act_boundary(u, MobiusMap.identity(3), 4.0, s.points), u(s.points))
    n, p = 3, 4.0
    one_psi = act_boundary(lambda q: np.ones(len(q)), MobiusMap(np.array([0.3, 0.0, 0.0])), p, s.points)
    eta1 = s.points[:, 0]
    expected = ((1 - 0.09) / (1 - 0.6 * eta1 + 0.09)) ** ((n - 1) / p)
    np.testing.assert_allclose(one_psi, expected, rtol=1e-14)


def test_boundary_norm_invariance_random_maps():
    rng = np.random.default_rng(21)
    s = sphere_rule(3, 80)
    u = lambda q: 1.0 + 0.5 * np.cos(2 * q[:, 0]) + q[:, 1] * q[:, 2]  # noqa: E731
    for _ in range(20):
        m = random_mobius(3, rng)
        p = rng.uniform(1.2, 6.0)
        lhs = s.integrate(np.abs(act_boundary(u, m, p, s.points)) ** p)
        rhs = s.integrate(np.abs(u(s.points)) ** p)
        assert abs(lhs / rhs - 1) <= 1e-7


def test_ball_norm_invariance_and_group_law():
    rng = np.random.default_rng(22)
    b = ball_rule(3, m=40, resolution=50)
    v = lambda q: np.exp(q[:, 0] - 0.5 * q[:, 1]) + q[:, 2] ** 2  # noqa: E731
    base = b.integrate(np.abs(v(b.points)) ** 1.5)
    grid = rng.uniform(-0.5, 0.5, size=(30, 3))
    for _ in range(20):
        m = random_mobius(3, rng, max_radius=0.5)
        qp = rng.uniform(1.1, 2.0)
        vals = act_ball(v, m, qp, b.points)
        assert abs(b.integrate(np.abs(vals) ** qp) / b.integrate(np.abs(v(b.points)) ** qp) - 1) <= 1e-6
        back = act_ball(act_ball(v, m, qp), m.inverse(), qp, grid)
        np.testing.assert_allclose(back, v(grid), rtol=1e-8)
    np.testing.assert_allclose(act_ball(v, MobiusMap.identity(3), 1.5, b.points), v(b.points))
    assert base > 0


def test_boundary_group_law():
    rng = np.random.default_rng(5)
    s = sphere_rule(3, 8)
    u = lambda q: np.exp(q[:, 0]) + q[:, 1]  # noqa: E731
    m1, m2 = random_mobius(3, rng), random_mobius(3, rng)
    lhs = act_boundary(act_boundary(u, m1, 3.0), m2, 3.0, s.points)
    # (u_{Psi1})_{Psi2} = u_{Psi1 o Psi2}; the composite boundary Jacobian follows the chain rule
    comp = m1(m2(s.points))
    jac = m1.jacobians(m2(s.points))[1] * m2.jacobians(s.points)[1]
    np.testing.assert_allclose(lhs, jac ** (1 / 3.0) * u(comp), rtol=1e-12)


def test_halfspace_examples():
    np.testing.assert_allclose(halfspace_ball(np.array([0.0, 0.0, 1.0])), 0.0, atol=1e-16)
    np.testing.assert_allclose(halfspace_ball(np.zeros(3)), [0.0, 0.0, 1.0], atol=1e-16)
    with pytest.raises(DomainError):
        halfspace_ball(np.array([0.0, 0.0, -0.1]))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(3, 5))
def test_halfspace_identities(seed, n):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(size=n - 1) * 2, [rng.uniform(0.01, 3)]])
    y = np.concatenate([rng.normal(size=n - 1) * 2, [0.0]])
    xi, eta = halfspace_ball(x), halfspace_ball(y)
    en = np.eye(n)[-1]
    assert abs(np.linalg.norm(eta) - 1) <= 1e-12
    assert np.dot(xi + en, xi + en) == pytest.approx(4 / ((1 + x[-1]) ** 2 + x[:-1] @ x[:-1]), rel=1e-12)
    assert x[-1] == pytest.approx((1 - xi @ xi) / ((xi + en) @ (xi + en)), rel=1e-10)
    lhs = 2 * np.linalg.norm(xi - eta) / (np.linalg.norm(xi + en) * np.linalg.norm(eta + en))
    assert lhs == pytest.approx(np.linalg.norm(x - y), rel=1e-12)
    np.testing.assert_allclose(ball_halfspace(xi), x, rtol=1e-10, atol=1e-12)


def _bump(y):
    rho2 = np.sum(np.atleast_2d(y) ** 2, axis=1)
    out = np.zeros_like(rho2)
    inside = rho2 < 1
    out[inside] = np.exp(1 - 1 / (1 - rho2[inside]))
    return out


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.5])
def test_pullback_preserves_lp_norm(alpha):
    n = 3
    p = 2 * (n - 1) / (n + alpha - 2)
    u = transfer_boundary(_bump, alpha)
    s = sphere_rule(n, 160)
    lhs = s.integrate(np.abs(u(s.points)) ** p)
    rhs = 2 * math.pi * quad(lambda r: _bump(np.array([[r, 0.0]]))[0] ** p * r, 0, 1, epsabs=1e-14)[0]
    assert abs(lhs / rhs - 1) <= 1e-4
