import math

import pytest

from reltfw import thomas_fermi as tf

# classical neutral-atom slope of the TF equation, phi'(0) = -1.588071022611...
PHI_SLOPE = -1.5880710226


def test_shooting_slope():
    assert tf.tf_slope_shooting() == pytest.approx(PHI_SLOPE, abs=1e-9)


def test_direct_minimization_agrees_with_shooting():
    res = tf.get_e_tf()
    assert res.rel_diff < 1e-6
    assert res.e_tf == pytest.approx(res.shooting, rel=1e-6)


def test_e_tf_matches_physical_scaling():
    # 0.7687 Z^{7/3} hartree at gamma = (3 pi^2)^{2/3}; e_tf scales with gamma
    e = tf.e_tf()
    assert e / (3 * math.pi**2) ** (2 / 3) == pytest.approx(0.768745, rel=1e-5)


def test_grid_levels_converge_monotonically():
    levels = tf.get_e_tf().levels
    E = [E for _, E in levels]
    d1, d2 = E[1] - E[0], E[2] - E[1]
    # second-order convergence: successive differences shrink by about 4
    assert d1 / d2 == pytest.approx(4.0, rel=0.05)


def test_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("RELTFW_CACHE_DIR", str(tmp_path))
    monkeypatch.setattr(tf, "_CACHE", {})
    monkeypatch.setattr(tf, "compute_e_tf", lambda: tf.TFConstant(7.0, ((1, -7.0),), 7.0, -1.5, 0.0))
    first = tf.get_e_tf()
    assert (tmp_path / "e_tf.json").exists()
    monkeypatch.setattr(tf, "_CACHE", {})
    monkeypatch.setattr(tf, "compute_e_tf", lambda: pytest.fail("cache not used"))
    assert tf.get_e_tf() == first
