import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reltfw.cutoff_radii import (
    F_beta,
    F_beta_prime,
    F_tilde,
    F_tilde_prime,
    R_of_beta,
    R_tilde,
    beta_of_R,
)

log_param = st.floats(min_value=-4.0, max_value=4.0)


def brute_force_min(fun, lo, hi, n=4001, rounds=3):
    """Grid search, zooming into the neighbourhood of the best node."""
    for _ in range(rounds):
        r = np.geomspace(lo, hi, n)
        vals = np.array([fun(x) for x in r])
        k = int(np.argmin(vals))
        lo, hi = r[max(k - 1, 0)], r[min(k + 1, n - 1)]
    return r[k]


def test_R_of_beta_stationary():
    for beta in [1e-6, 0.1, 1.0, 10.0, 1e6]:
        R = R_of_beta(beta).r_min
        assert abs(F_beta_prime(R, beta)) * R * beta < 1e-10


def test_R_of_beta_monotone_and_limits():
    assert R_of_beta(1.0).r_min > R_of_beta(0.1).r_min
    assert R_of_beta(10.0).r_min > R_of_beta(1.0).r_min
    assert R_of_beta(1e-6).r_min < 0.1
    assert R_of_beta(1e6).r_min > 100.0


@settings(max_examples=60, deadline=None)
@given(log_param)
def test_beta_of_R_inverts_R_of_beta(u):
    beta = 10.0**u
    R = R_of_beta(beta).r_min
    assert beta_of_R(R) == pytest.approx(beta, rel=1e-9)


def test_R_of_beta_brute_force():
    for beta in [0.05, 1.0, 30.0]:
        R = R_of_beta(beta).r_min
        ref = brute_force_min(lambda r: F_beta(r, beta), 1e-3, 1e3)
        assert R == pytest.approx(ref, rel=1e-4)


def test_F_tilde_continuous_at_kink():
    for beta in [0.1, 1.0, 10.0]:
        Rb = R_of_beta(beta).r_min
        inner = F_tilde(Rb * (1 - 1e-12), 2.0, beta)
        outer = F_tilde(Rb, 2.0, beta)
        assert inner == pytest.approx(outer, rel=1e-10)


def test_derivative_jump_magnitude():
    for beta in [0.1, 1.0, 10.0]:
        Rb = R_of_beta(beta).r_min
        a = math.asinh(Rb)
        h = 1e-5 * Rb
        fun = lambda r: F_tilde(r, 1.0, beta, Rb)  # noqa: E731
        right = (-3 * fun(Rb) + 4 * fun(Rb + h) - fun(Rb + 2 * h)) / (2 * h)
        # the branches agree at R_beta, so fun(Rb) also serves the inner stencil
        left = (3 * fun(Rb) - 4 * fun(Rb - h) + fun(Rb - 2 * h)) / (2 * h)
        expected = 3.0 / (Rb**2 * a**3)
        # outer minus inner is positive, so the objective stays convex
        assert right - left == pytest.approx(expected, rel=1e-6)


def test_one_sided_derivatives_match_closed_form():
    beta, alpha = 1.0, 3.0
    Rb = R_of_beta(beta).r_min
    for r in [0.3 * Rb, 0.9 * Rb, 1.1 * Rb, 5 * Rb]:
        h = 1e-6 * r
        fd = (F_tilde(r + h, alpha, beta, Rb) - F_tilde(r - h, alpha, beta, Rb)) / (2 * h)
        assert F_tilde_prime(r, alpha, beta, Rb) == pytest.approx(fd, rel=1e-7)


def test_R_tilde_on_diagonal_is_R_beta():
    for beta in np.geomspace(1e-3, 1e3, 25):
        assert R_tilde(beta, beta).r_min == pytest.approx(R_of_beta(beta).r_min, rel=1e-10)


@pytest.mark.parametrize("alpha,beta", [(0.5, 1.0), (100.0, 0.01), (0.01, 100.0), (3.0, 0.2),
                                        (0.2, 3.0)])
def test_R_tilde_brute_force(alpha, beta):
    Rt = R_tilde(alpha, beta).r_min
    Rb = R_of_beta(beta).r_min
    ref = brute_force_min(lambda r: F_tilde(r, alpha, beta, Rb), 1e-3, 1e3)
    assert Rt == pytest.approx(ref, rel=1e-4)


def test_R_tilde_monotone_in_alpha():
    beta = 1.0
    # strictly increasing away from the flat band where the kink is the minimizer
    assert R_tilde(8.0, beta).r_min > R_tilde(4.0, beta).r_min
    assert R_tilde(100.0, beta).r_min > R_tilde(10.0, beta).r_min
    assert R_tilde(0.5, beta).r_min > R_tilde(0.1, beta).r_min
    # inside the band R_tilde sits at R_beta
    assert R_tilde(2.0, beta).r_min >= R_tilde(1.5, beta).r_min
    assert R_tilde(1.5, beta).r_min == pytest.approx(R_of_beta(beta).r_min, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(log_param, log_param)
def test_R_tilde_is_a_minimizer(ua, ub):
    alpha, beta = 10.0**ua, 10.0**ub
    res = R_tilde(alpha, beta)
    Rb = R_of_beta(beta).r_min
    r = res.r_min
    for q in (1 - 1e-6, 1 + 1e-6):
        assert F_tilde(r * q, alpha, beta, Rb) >= res.value * (1 - 1e-13)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        R_of_beta(0.0)
    with pytest.raises(ValueError):
        R_tilde(-1.0, 1.0)
    with pytest.raises(ValueError):
        F_beta(1.0, float("inf"))
