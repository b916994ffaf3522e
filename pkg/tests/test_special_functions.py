import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from reltfw import special_functions as sf

log_t = st.floats(min_value=-8.0, max_value=8.0)


def test_f_closed_form_matches_phase_space_derivative():
    # f^2 is the derivative of s^2 sqrt(1+s^2)... compared against a direct evaluation
    t = np.array([1e-3, 0.1, 1.0, 10.0, 1e3])
    expected = np.sqrt(t / np.sqrt(t**2 + 1) + 2 * t**2 / (t**2 + 1) * np.arcsinh(t))
    np.testing.assert_allclose(sf.f(t), expected, rtol=1e-15)


def test_f_small_argument_series():
    t = 1e-3
    series = math.sqrt(t) * (1 + 0.75 * t**2 - 121 / 96 * t**4)
    assert sf.f(t) == pytest.approx(series, rel=1e-13)


def _F_reference(x):
    # s = u^2 removes the square-root behaviour at the origin
    val, _ = quad(lambda u: 2.0 * u * float(sf.f(u * u)), 0.0, math.sqrt(x),
                  epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def test_F_table_against_independent_quadrature():
    t = np.geomspace(1e-6, 1e6, 37)
    ref = np.array([_F_reference(x) for x in t])
    np.testing.assert_allclose(sf.F(t), ref, rtol=1e-9)


def test_F_exact_and_table_agree():
    t = np.geomspace(1e-7, 1e7, 50)
    np.testing.assert_allclose(sf.F(t), sf.F(t, exact=True), rtol=1e-10)


def test_F_small_series():
    t = 1e-5
    assert sf.F(t) == pytest.approx(2 / 3 * t**1.5 + 3 / 14 * t**3.5, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(log_t)
def test_F_inverse_round_trip(u):
    t = 10.0**u
    assert sf.F_inverse(sf.F(t)) == pytest.approx(t, rel=1e-10)


def test_F_inverse_exact_path():
    for t in [1e-3, 0.7, 42.0]:
        assert sf.F_inverse(sf.F(t, exact=True), exact=True) == pytest.approx(t, rel=1e-11)


def test_F_beyond_table_top():
    t = 3e8
    tab = sf.get_table()
    top = tab.F_values[-1] + quad(lambda s: float(sf.f(s)), tab.max_node, t, epsabs=0.0,
                                  epsrel=1e-12)[0]
    assert sf.F(t) == pytest.approx(top, rel=1e-12)
    assert sf.F_inverse(sf.F(t)) == pytest.approx(t, rel=1e-9)


def test_F_zero_and_domain():
    assert sf.F(0.0) == 0.0
    assert sf.F_inverse(0.0) == 0.0
    with pytest.raises(ValueError):
        sf.F(-1.0)
    with pytest.raises(ValueError):
        sf.F(float("nan"))


def test_t_tf_series_and_closed_form_agree_at_switch():
    # just above the switch the closed form is still accurate to ~1e-12 relative
    s = np.array([0.1001, 0.2, 0.5])
    c = np.sqrt(1 + s * s)
    closed = s * c**3 + s**3 * c - np.arcsinh(s) - 8 / 3 * s**3
    np.testing.assert_allclose(sf.t_tf(s), closed, rtol=1e-11)
    s_small = 1e-3
    assert sf.t_tf(s_small) == pytest.approx(0.8 * s_small**5 - s_small**7 / 7, rel=1e-10)


def test_t_tf_derivative_by_quadrature():
    s = 2.5
    integral, _ = quad(lambda q: float(sf.t_tf_prime(q)), 0.0, s, epsabs=0.0, epsrel=1e-13)
    assert sf.t_tf(s) == pytest.approx(integral, rel=1e-12)


def test_H_limits():
    assert sf.H(1e-6) == pytest.approx(2 / 3, abs=1e-3)
    assert sf.H(1e8) == pytest.approx(1.0, abs=1e-1)
    h = np.asarray(sf.H(np.geomspace(1e-8, 1e8, 10_000)))
    assert np.all((h > 0) & (h < 1))


def test_minimize_H_stable_under_denser_scan():
    r1 = sf.minimize_H()
    r2 = sf.minimize_H(scan_points=4 * 2001)
    assert abs(r1.a - r2.a) <= 1e-9
    assert sf.H(r1.s_star, exact=True) == pytest.approx(r1.a, abs=1e-14)


def test_dfs2_matches_finite_differences():
    for s in [0.01, 0.3, 1.0, 7.0, 200.0]:
        h = 1e-5 * s
        fd = (sf.f(s + h) / (s + h) ** 2 - sf.f(s - h) / (s - h) ** 2) / (2 * h)
        assert sf.dfs2(s) == pytest.approx(fd, rel=1e-7)


def test_g_limit_and_positive_minimum():
    assert sf.g(1e-6) == pytest.approx(1.5, abs=1e-3)
    s_min, c_g = sf.min_g()
    assert c_g > 0
    assert sf.g(s_min) == pytest.approx(c_g, rel=1e-14)
    assert np.all(np.asarray(sf.g(np.geomspace(1e-4, 1e4, 2000))) >= c_g * (1 - 1e-12))


def test_appendix_bounds_on_log_grid():
    rep = sf.appendix_bounds_report(np.geomspace(1e-8, 1e8, 10_000))
    assert rep["all_passed"], rep


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-8000, 8000), min_size=2, max_size=20, unique=True))
def test_appendix_bounds_random_points(ks):
    # lattice of 1e-3 decades keeps neighbouring points resolvable for the discrete checks
    rep = sf.appendix_bounds_report(10.0 ** (np.array(ks) / 1000.0))
    assert rep["all_passed"], rep


def test_phase_space_sandwich():
    rep = sf.phase_space_report(np.geomspace(1e-8, 1e8, 10_000))
    assert rep["all_passed"], rep


def test_table_round_trip_serialization(tmp_path):
    tab = sf.get_table()
    path = tmp_path / "t.json"
    tab.save(path)
    back = sf.SpecialFunctionTable.load(path)
    t = np.geomspace(1e-7, 1e7, 101)
    np.testing.assert_array_equal(back.F(t), tab.F(t))


def test_table_rejects_unknown_schema():
    with pytest.raises(ValueError):
        sf.SpecialFunctionTable.from_dict({"schema": "other"})
