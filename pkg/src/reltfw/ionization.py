"""Excess-charge bound ``N < (2/sqrt(a)) Z`` and the multi-center weight kernel."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .special_functions import minimize_H

SCHEMA = "reltfw.ionization_bound/1"


@dataclass(frozen=True)
class IonizationBoundReport:
    a: float
    b: float
    s_star: float
    bound_coefficient: float
    Z: float
    analytic_upper: float
    solver_N_max: float = None

    def to_dict(self):
        d = asdict(self)
        d["schema"] = SCHEMA
        return d

    def consistent(self):
        """``Z <= solver_N_max < analytic_upper`` (True when no solver value is attached)."""
        if self.solver_N_max is None:
            return True
        return self.Z <= self.solver_N_max < self.analytic_upper


def bound_coefficient():
    return 2.0 / math.sqrt(minimize_H().a)


def ionization_bound(Z, solver_N_max=None):
    """Analytic upper bound on the particle number of a minimizer with charge ``Z``."""
    if not (math.isfinite(Z) and Z > 0):
        raise ValueError("Z must be positive")
    h = minimize_H()
    coef = 2.0 / math.sqrt(h.a)
    return IonizationBoundReport(
        a=h.a,
        b=h.b,
        s_star=h.s_star,
        bound_coefficient=coef,
        Z=float(Z),
        analytic_upper=coef * Z,
        solver_N_max=None if solver_N_max is None else float(solver_N_max),
    )


def _centers(kappa_list, R_list):
    kappa = np.asarray(kappa_list, dtype=float).reshape(-1)
    R = np.asarray(R_list, dtype=float).reshape(-1, 3)
    if kappa.size != R.shape[0]:
        raise ValueError("kappa_list and R_list differ in length")
    if np.any(~np.isfinite(kappa)) or np.any(kappa <= 0):
        raise ValueError("weights kappa must be positive")
    return kappa, R


def _distances(x, R):
    d = np.linalg.norm(np.asarray(x, dtype=float).reshape(1, 3) - R, axis=1)
    if np.any(d == 0):
        raise ValueError("point coincides with a nucleus")
    return d


def weight_phi(x, kappa_list, R_list):
    """``phi(x) = sum_k kappa_k / |x - R_k|``."""
    kappa, R = _centers(kappa_list, R_list)
    return float(np.sum(kappa / _distances(x, R)))


def kernel_sides(x, y, kappa_list, R_list):
    """Left side, the exact middle expression and right side of the kernel bound.

    ``(1/phi(x) + 1/phi(y)) / |x-y|`` equals
    ``sum_k kappa_k (|x-R_k| + |y-R_k|) / |x-y| g_k(x) g_k(y)`` and, by the
    triangle inequality, dominates ``sum_k kappa_k g_k(x) g_k(y)`` with
    ``g_k(x) = 1 / (phi(x) |x - R_k|)``.
    """
    kappa, R = _centers(kappa_list, R_list)
    dx, dy = _distances(x, R), _distances(y, R)
    dxy = float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))
    if dxy == 0:
        raise ValueError("x and y must be distinct")
    px, py = float(np.sum(kappa / dx)), float(np.sum(kappa / dy))
    gx, gy = 1.0 / (px * dx), 1.0 / (py * dy)
    lhs = (1.0 / px + 1.0 / py) / dxy
    middle = float(np.sum(kappa * (dx + dy) / dxy * gx * gy))
    rhs = float(np.sum(kappa * gx * gy))
    return lhs, middle, rhs


def triangle_kernel_check(x, y, kappa_list, R_list, rtol=1e-12):
    """True when the kernel bound holds at ``(x, y)`` up to rounding ``rtol``.

    Equality occurs when every nucleus lies on the segment from x to y.
    """
    lhs, _, rhs = kernel_sides(x, y, kappa_list, R_list)
    return lhs >= rhs * (1.0 - rtol)
