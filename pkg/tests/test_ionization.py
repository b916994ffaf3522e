import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reltfw.ionization import (
    bound_coefficient,
    ionization_bound,
    kernel_sides,
    triangle_kernel_check,
    weight_phi,
)
from reltfw.radial import default_grid, find_max_ionization, scan_max_ionization
from reltfw.radial.minimize import SolverOptions

COEF = 2.557211758

coord = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
point = st.tuples(coord, coord, coord)


def test_bound_coefficient():
    assert bound_coefficient() == pytest.approx(COEF, abs=1e-8)
    assert 2 / math.sqrt(0.6116832747) == pytest.approx(COEF, abs=1e-9)


def test_report_fields():
    rep = ionization_bound(1.0)
    assert rep.analytic_upper == rep.bound_coefficient
    assert ionization_bound(3.0).analytic_upper == 3.0 * rep.bound_coefficient
    assert rep.b == pytest.approx(1.0, abs=1e-6)
    assert rep.consistent()
    assert ionization_bound(2.0, solver_N_max=2.1).consistent()
    assert not ionization_bound(2.0, solver_N_max=6.0).consistent()
    assert rep.to_dict()["schema"].startswith("reltfw.")
    with pytest.raises(ValueError):
        ionization_bound(0.0)


def test_single_center_kernel():
    x, y = np.array([0.3, -1.0, 2.0]), np.array([-0.7, 0.1, 0.4])
    assert weight_phi(x, [1.0], [[0, 0, 0]]) == pytest.approx(1 / np.linalg.norm(x), rel=1e-15)
    lhs, middle, rhs = kernel_sides(x, y, [1.0], [[0, 0, 0]])
    # g_1 = 1, so the middle expression is the left side itself
    assert middle == pytest.approx(lhs, rel=1e-14)
    assert rhs == pytest.approx(1.0, rel=1e-14)
    assert lhs >= rhs


@settings(max_examples=200, deadline=None)
@given(point, point)
def test_two_center_kernel(x, y):
    x, y = np.array(x), np.array(y)
    R = [[0, 0, 1], [0, 0, -1]]
    if min(np.linalg.norm(x - np.array(r)) for r in R + [y]) < 1e-6:
        return
    if np.linalg.norm(y - np.array(R[0])) < 1e-6 or np.linalg.norm(y - np.array(R[1])) < 1e-6:
        return
    assert triangle_kernel_check(x, y, [1.0, 1.0], R)
    lhs, middle, _ = kernel_sides(x, y, [1.0, 1.0], R)
    assert middle == pytest.approx(lhs, rel=1e-12)


def test_kernel_swap_symmetry():
    rng = np.random.default_rng(3)
    R = rng.normal(size=(3, 3))
    kappa = rng.uniform(0.5, 2.0, size=3)
    for _ in range(50):
        x, y = rng.normal(size=3) * 3, rng.normal(size=3) * 3
        a = kernel_sides(x, y, kappa, R)
        b = kernel_sides(y, x, kappa, R)
        np.testing.assert_allclose(a, b, rtol=1e-14)


def test_kernel_domain_errors():
    with pytest.raises(ValueError):
        weight_phi([0, 0, 1], [1.0], [[0, 0, 1]])
    with pytest.raises(ValueError):
        kernel_sides([1, 0, 0], [1, 0, 0], [1.0], [[0, 0, 0]])
    with pytest.raises(ValueError):
        weight_phi([1, 0, 0], [-1.0], [[0, 0, 0]])


def test_max_ionization_bracket_fast():
    alpha = 1 / 137
    scan = find_max_ionization(1.0, 1.0, alpha, default_grid(alpha, n=600))
    assert scan.converged
    assert 1.0 - 1e-3 <= scan.N_max < COEF
    assert scan.free_particle_number == pytest.approx(scan.N_max, abs=2e-3)
    assert scan.to_dict()["legs"]


@pytest.mark.slow
def test_bound_exceeds_solver_over_parameter_matrix():
    Zs = (1.0, 2.0, 5.0, 10.0)
    for lam, alpha in itertools.product((0.5, 1.0), (1 / 137, 0.05)):
        scans = scan_max_ionization(Zs, lam, alpha, n=600, options=SolverOptions(), jobs=2)
        N_max = [s.N_max for s in scans]
        print(f"lambda={lam} alpha_s={alpha:.5f} N_max={N_max}")
        for Z, scan in zip(Zs, scans):
            assert scan.converged
            assert ionization_bound(Z, scan.N_max).consistent()
        # reported as data: N_max grows with Z over this matrix
        assert all(np.diff(N_max) > 0)


def test_parallel_scan_matches_serial():
    alpha = 0.05
    serial = scan_max_ionization((1.0, 2.0), 1.0, alpha, n=300, jobs=1)
    parallel = scan_max_ionization((1.0, 2.0), 1.0, alpha, n=300, jobs=2)
    assert [s.to_dict() for s in serial] == [s.to_dict() for s in parallel]
