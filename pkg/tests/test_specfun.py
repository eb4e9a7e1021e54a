import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confext.specfun import (
    DivergenceError,
    DomainError,
    HypArgs,
    beta_fn,
    contiguous_residuals,
    gamma_ratio,
    hyp2f1,
    hyp2f1_euler,
    ln_gamma,
    pochhammer,
)

# mpmath at 40 digits, frozen
FROZEN_F = [
    ((1.75, 0.25, 2.5, 0.9), 1.3607511922229346619),
    ((1.5, 0.5, 2.0, 0.99999), 7.8212567217108098015),  # c-a-b = 0, log case
    ((2.0, 1.0, 2.5, 0.97), 11.114966694978361504),  # c-a-b = -1/2
    ((0.9, -0.1, 1.5, 0.999), 0.8669169575644923534),
    ((201.25, 0.25, 202.5, 0.995), 3.1720411476118652256),  # large l mode
    ((-2.5, 1.3, 0.7, 0.8), -0.27395126254824126253),
]


def test_ln_gamma_trivial_values():
    assert ln_gamma(1.0) == 0.0
    assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)


def test_ln_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        ln_gamma(0.0)
    with pytest.raises(DomainError):
        ln_gamma(-2.5)


def test_ln_gamma_against_mpmath_on_log_grid():
    for x in np.logspace(-3, 3, 61):
        ref = float(mpmath.loggamma(mpmath.mpf(x)))
        assert abs(ln_gamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_duplication_formula():
    z = 3.7
    lhs = math.exp(ln_gamma(2 * z))
    rhs = 2 ** (2 * z - 1) / math.sqrt(math.pi) * math.exp(ln_gamma(z) + ln_gamma(z + 0.5))
    assert abs(lhs - rhs) / lhs <= 1e-12


def test_gamma_ratio_handles_signs_and_poles():
    assert gamma_ratio((-0.5,), (0.5,)) == pytest.approx(-2.0, rel=1e-14)
    assert gamma_ratio((2.5,), (-3.0,)) == 0.0
    with pytest.raises(DivergenceError):
        gamma_ratio((0.0,), (1.0,))
    # far beyond the overflow point of Gamma itself
    assert gamma_ratio((300.5,), (300.0,)) == pytest.approx(math.sqrt(300.0), rel=1e-3)


def test_beta_examples():
    assert beta_fn(1, 1) == pytest.approx(1.0, rel=1e-15)
    assert beta_fn(0.5, 0.5) == pytest.approx(math.pi, rel=1e-14)
    assert beta_fn(0.7, 1) == pytest.approx(1 / 0.7, rel=1e-14)
    with pytest.raises(DomainError):
        beta_fn(0.0, 1.0)


def test_pochhammer_examples():
    assert pochhammer(3, 0) == 1
    assert pochhammer(2, 3) == 24
    assert pochhammer(-1.5, 2) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        pochhammer(1.0, -1)


def test_hyp2f1_examples():
    assert hyp2f1(0.3, -1.2, 2.5, 0.0) == 1.0
    assert hyp2f1(1, 1, 2, 0.5) == pytest.approx(2 * math.log(2), rel=1e-14)
    assert hyp2f1(0.5, 0.5, 2, 1.0) == pytest.approx(4 / math.pi, rel=1e-14)


@pytest.mark.parametrize("args,expected", FROZEN_F)
def test_hyp2f1_frozen_oracle(args, expected):
    assert hyp2f1(*args) == pytest.approx(expected, rel=1e-10)


def test_hyp2f1_errors():
    with pytest.raises(DivergenceError):
        hyp2f1(1.0, 1.0, 2.0, 1.0)
    with pytest.raises(DomainError):
        hyp2f1(1.0, 1.0, -2.0, 0.3)
    with pytest.raises(DomainError):
        hyp2f1(1.0, 1.0, 2.0, 1.5)


def test_hyp_args_invariants():
    assert HypArgs(1, 1, 2, 0.5).evaluate() == pytest.approx(2 * math.log(2))
    with pytest.raises(DomainError):
        HypArgs(1, 1, 0, 0.5)
    with pytest.raises(DivergenceError):
        HypArgs(1, 1, 2, 1.0)


def test_terminating_series_is_a_polynomial():
    # F(-2, b; c; z) = 1 - 2bz/c + b(b+1)z^2/(c(c+1))
    b, c, z = 1.7, 0.9, 0.95
    expected = 1 - 2 * b * z / c + b * (b + 1) * z * z / (c * (c + 1))
    assert hyp2f1(-2.0, b, c, z) == pytest.approx(expected, rel=1e-14)


def test_vectorized_matches_scalar():
    zs = np.array([0.0, 0.2, 0.55, 0.9, 0.9999])
    vec = hyp2f1(2.25, 0.25, 2.5, zs)
    assert vec.shape == zs.shape
    for z, v in zip(zs, vec):
        assert v == pytest.approx(hyp2f1(2.25, 0.25, 2.5, float(z)), rel=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0, -0.2, -1.0])
@pytest.mark.parametrize("l", [0, 7, 150])
def test_mode_functions_near_one_against_mpmath(alpha, l):
    n = 3
    a, b, c = l + (n + alpha) / 2 - 1, alpha / 2, l + n / 2
    zs = np.array([0.3, 0.7, 0.95, 0.999, 1 - 1e-5, 1 - 1e-6])
    ours = hyp2f1(a, b, c, zs)
    ref = np.array([float(mpmath.hyp2f1(a, b, c, z)) for z in zs])
    np.testing.assert_allclose(ours, ref, rtol=1e-10)


@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(0.5, 6), z=st.floats(0, 0.95)
)
def test_symmetry_in_a_and_b(a, b, c, z):
    f1, f2 = hyp2f1(a, b, c, z), hyp2f1(b, a, c, z)
    assert abs(f1 - f2) <= 1e-12 * max(1.0, abs(f1))


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(-3, 3), b=st.floats(0.05, 3), extra=st.floats(0.05, 3), z=st.floats(0, 0.95)
)
def test_euler_integral_agrees_with_series(a, b, extra, z):
    c = b + extra
    ref = hyp2f1(a, b, c, z)
    assert abs(hyp2f1_euler(a, b, c, z) - ref) <= 1e-9 * max(1.0, abs(ref))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.05, 3), b=st.floats(0.05, 3), c=st.floats(0.5, 6))
def test_monotone_in_z_for_positive_parameters(a, b, c):
    zs = np.linspace(0, 0.99, 60)
    vals = hyp2f1(a, b, c, zs)
    assert np.all(np.diff(vals) > 0)


def test_contiguous_residual_examples():
    assert contiguous_residuals(0.7, 1.1, 2.3, 0.0) == (0.0, 0.0, 0.0)
    assert max(contiguous_residuals(1.2, 0.4, 2.5, 0.3)) <= 1e-10
    assert max(contiguous_residuals(0.5, 0.5, 1.5, 0.9)) <= 1e-9


def test_contiguous_residuals_random_grid():
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(200):
        a, b = rng.uniform(-3, 3, size=2)
        c = rng.uniform(0.5, 6)
        z = rng.uniform(0, 0.95)
        worst = max(worst, *contiguous_residuals(a, b, c, z))
    assert worst <= 1e-9


def test_hyp2f1_uses_exact_complement():
    import mpmath as mp

    # t rounds to 1.0 in double precision while 1 - t = 1e-17 is known exactly
    a, b, c = 1.75, 0.5, 1.5
    val = hyp2f1(a, b, c, np.array([1.0]), complement=np.array([1e-17]))[0]
    with mp.workdps(40):
        ref = mp.hyp2f1(a, b, c, 1 - mp.mpf("1e-17"))
    assert val == pytest.approx(float(ref), rel=1e-10)
    with pytest.raises(DivergenceError):
        hyp2f1(a, b, c, 1.0)
