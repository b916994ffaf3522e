"""Nonrelativistic Thomas-Fermi atom at unit charge and unit ``gamma``.

``e_tf`` is the magnitude of the infimum of

    int (3/10) rho^{5/3} - rho/|x| + D[rho]

over nonnegative densities. It is computed by Newton's method on a
logarithmic radial grid (three resolutions, Richardson extrapolated) and
cross-checked against the slope ``phi'(0)`` of the dimensionless
Thomas-Fermi equation ``phi'' = phi^{3/2}/sqrt(x)`` obtained by shooting.
"""

from __future__ import annotations

import json
import logging
import math
import os
import threading
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .special_functions import cache_dir

log = logging.getLogger(__name__)

SCHEMA = "reltfw.e_tf/1"
# length scale of the dimensionless TF equation: r = b x Z^{-1/3}, here with gamma = 1
_B = 0.5 * (3.0 * math.pi / 4.0) ** (2.0 / 3.0)
_GAMMA_PHYS = (3.0 * math.pi**2) ** (2.0 / 3.0)


@dataclass(frozen=True)
class TFConstant:
    e_tf: float  # direct minimization, extrapolated
    levels: tuple  # (n, energy) per grid level
    shooting: float  # value implied by phi'(0)
    phi_slope: float
    rel_diff: float

    def to_dict(self):
        d = asdict(self)
        d["levels"] = [list(x) for x in self.levels]
        d["schema"] = SCHEMA
        return d


def tf_energy_on_grid(n, r_min=1e-22, r_max=1e7, maxiter=200):
    """Minimum of the discrete TF functional on an ``n``-point log grid.

    Variables are ``u = log rho``; Newton steps use the dense Hessian
    (the Hartree kernel ``1/max(r, r')`` is dense) with componentwise
    clipping and Armijo backtracking.
    """
    u = np.linspace(math.log(r_min), math.log(r_max), n)
    h = u[1] - u[0]
    r = np.exp(u)
    w = 4.0 * math.pi * r**3 * h
    w[0] *= 0.5
    w[-1] *= 0.5
    kern = 1.0 / np.maximum.outer(r, r)

    def evaluate(x):
        rho = np.exp(x)
        phi = kern @ (w * rho)
        E = float(np.sum(w * (0.3 * rho ** (5.0 / 3.0) - rho / r)) + 0.5 * np.sum(w * rho * phi))
        grad = w * (0.5 * rho ** (2.0 / 3.0) - 1.0 / r + phi)
        return E, grad, rho

    # start from a density with the right small- and large-r powers
    x = -1.5 * u - 4.5 * np.log1p(r)
    E, gr, rho = evaluate(x)
    for _ in range(maxiter):
        hr = np.diag(w * rho ** (-1.0 / 3.0) / 3.0) + w[:, None] * kern * w[None, :]
        hu = rho[:, None] * hr * rho[None, :] + np.diag(np.maximum(gr * rho, 0.0))
        gu = gr * rho
        d = np.clip(-np.linalg.solve(hu, gu), -5.0, 5.0)
        slope = float(gu @ d)
        t = 1.0
        while True:
            En, grn, rhon = evaluate(x + t * d)
            if (math.isfinite(En) and En <= E + 1e-4 * t * slope) or t < 1e-12:
                break
            t *= 0.5
        x = x + t * d
        dE = E - En
        E, gr, rho = En, grn, rhon
        if abs(dE) < 1e-15 * abs(E) and t == 1.0:
            break
    return E


def tf_slope_shooting(tol=1e-13):
    """``phi'(0)`` for the neutral TF atom: ``phi(0) = 1``, ``phi -> 0`` at infinity.

    Too steep a slope makes ``phi`` cross zero, too shallow a slope makes
    it turn upward; the slope is bisected between the two outcomes.
    """
    x0 = 1e-10

    def rhs(x, y):
        return [y[1], max(y[0], 0.0) ** 1.5 / math.sqrt(x)]

    def crosses(x, y):
        return y[0]

    def turns(x, y):
        return y[1]

    crosses.terminal = True
    turns.terminal = True

    def outcome(s):
        y0 = [1.0 + s * x0 + (4.0 / 3.0) * x0**1.5, s + 2.0 * math.sqrt(x0)]
        sol = solve_ivp(rhs, (x0, 1e4), y0, method="DOP853", rtol=1e-13, atol=1e-15,
                        events=(crosses, turns))
        if sol.t_events[0].size:
            return -1  # too steep
        return 1

    lo, hi = -1.7, -1.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if outcome(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def e_tf_from_slope(slope):
    """TF energy magnitude at ``gamma = 1``: ``(3/7) |phi'(0)| / b * (3 pi^2)^{2/3}``."""
    return (3.0 / 7.0) * abs(slope) / _B * _GAMMA_PHYS


def compute_e_tf(levels=(500, 1000, 2000)):
    """Direct minimization at three resolutions with two Richardson passes.

    The discretization error is O(h^2), so each pass removes one even power.
    """
    E = [tf_energy_on_grid(n) for n in levels]
    r1 = E[1] + (E[1] - E[0]) / 3.0
    r2 = E[2] + (E[2] - E[1]) / 3.0
    direct = -(r2 + (r2 - r1) / 15.0)
    slope = tf_slope_shooting()
    shoot = e_tf_from_slope(slope)
    return TFConstant(direct, tuple(zip(levels, E)), shoot, slope, abs(direct - shoot) / shoot)


_LOCK = threading.Lock()
_CACHE = {}


def get_e_tf():
    """Cached :class:`TFConstant` (memory, then ``$RELTFW_CACHE_DIR/e_tf.json``)."""
    with _LOCK:
        if "tf" in _CACHE:
            return _CACHE["tf"]
        d = cache_dir()
        path = None if d is None else os.path.join(d, "e_tf.json")
        res = None
        if path is not None:
            try:
                with open(path) as fh:
                    data = json.load(fh)
                if data.get("schema") == SCHEMA:
                    data.pop("schema")
                    data["levels"] = tuple(tuple(x) for x in data["levels"])
                    res = TFConstant(**data)
            except (OSError, ValueError, TypeError):
                res = None
        if res is None:
            log.info("computing e_tf (one-time)")
            res = compute_e_tf()
            if res.rel_diff > 1e-6:
                raise RuntimeError(f"e_tf oracles disagree: {res.e_tf} vs {res.shooting}")
            if path is not None:
                try:
                    os.makedirs(d, exist_ok=True)
                    tmp = path + f".{os.getpid()}.tmp"
                    with open(tmp, "w") as fh:
                        json.dump(res.to_dict(), fh, sort_keys=True)
                    os.replace(tmp, path)
                except OSError as exc:
                    log.warning("could not write e_tf cache: %s", exc)
        _CACHE["tf"] = res
        return res


def e_tf():
    return get_e_tf().e_tf
