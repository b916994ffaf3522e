"""Discrete relativistic TFW energy of a spherically symmetric chi-field.

The field ``chi = F(p)`` lives on the nodes of a :class:`RadialGrid` and is
piecewise linear in r, with ``chi = 0`` imposed at ``r_max``. The
Weizsacker term is the exact Dirichlet integral of the P1 field; the local
terms and the Hartree term use the lumped nodal weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..params import PhysicalParams
from ..special_functions import _f_raw, _t_tf_raw, get_table
from .grid import RadialGrid

PI2 = math.pi**2
P_FLOOR = 1e-12


@dataclass(frozen=True)
class EnergyBreakdown:
    weizsacker: float
    thomas_fermi: float
    external: float
    hartree: float
    nuclear: float
    total: float

    @classmethod
    def from_parts(cls, weizsacker, thomas_fermi, external, hartree, nuclear):
        parts = [float(weizsacker), float(thomas_fermi), float(external), float(hartree), float(nuclear)]
        return cls(*parts, math.fsum(parts))

    def to_dict(self):
        return asdict(self)


def check_chi(chi, grid):
    chi = np.asarray(chi, dtype=float)
    if chi.shape != grid.r.shape:
        raise ValueError(f"chi has shape {chi.shape}, grid has {grid.r.shape}")
    if not np.all(np.isfinite(chi)):
        raise FloatingPointError("chi contains non-finite values")
    if np.any(chi < 0):
        raise ValueError("chi must be nonnegative")
    return chi


def fermi_momentum(chi):
    """``p = F^{-1}(chi)`` nodewise."""
    return get_table().F_inverse(np.asarray(chi, dtype=float))


def density(p):
    return p**3 / (3.0 * PI2)


def hartree_potential(grid, rho):
    """``Phi(r_i) = sum_j w_j rho_j / max(r_i, r_j)``.

    This is the spherical Coulomb potential of ``rho`` (Newton's theorem)
    evaluated with inner and outer cumulative sums.
    """
    q = grid.w * rho
    inner = np.cumsum(q) / grid.r
    tail = np.cumsum((q / grid.r)[::-1])[::-1]
    return inner + np.append(tail[1:], 0.0)


def hartree_energy(grid, rho, sigma=None):
    """``D(rho, sigma) = 1/2 sum_ij w_i w_j rho_i sigma_j / max(r_i, r_j)``."""
    if sigma is None:
        sigma = rho
    return 0.5 * float(np.dot(grid.w * rho, hartree_potential(grid, sigma)))


def _p2_over_f(p):
    """``p^2 / f(p)`` with its small-p limit ``p^{3/2}``."""
    small = p < P_FLOOR
    f = _f_raw(np.where(small, 1.0, p))
    return np.where(small, p**1.5, p * p / f)


def _ttf_prime_over_f(p):
    small = p < P_FLOOR
    f = _f_raw(np.where(small, 1.0, p))
    tp = 8.0 * p**4 / (np.sqrt(p * p + 1.0) + 1.0)
    return np.where(small, 4.0 * p**3.5, tp / f)


def _local_curvature(p, V):
    """``d/dchi`` of the local gradient ``(t'(p)/8pi^2 + p^2 V/pi^2) / f(p)`` at fixed V."""
    small = p < P_FLOOR
    q = np.where(small, 1.0, p)
    c = np.sqrt(q * q + 1.0)
    f = _f_raw(q)
    fp = ((1.0 + 2.0 * q * q) / c**3 + 4.0 * q * np.arcsinh(q) / c**4) / (2.0 * f)
    tp = 8.0 * q**4 / (c + 1.0)
    tpp = 32.0 * q**3 / (c + 1.0) - 8.0 * q**5 / (c * (c + 1.0) ** 2)
    A = tp / (8.0 * PI2) + q * q * V / PI2
    Ap = tpp / (8.0 * PI2) + 2.0 * q * V / PI2
    exact = Ap / (f * f) - A * fp / f**3
    limit = 1.5 * V / PI2 + 7.0 * p * p / (4.0 * PI2)
    return np.where(small, limit, exact)


class Functional:
    """Energy, Lagrangian and gradient for one atom on one grid.

    The Lagrangian adds ``mu * int rho`` for the particle-number constraint.
    Evaluation accepts signed fields and uses ``|chi|``; replacing chi by
    ``|chi|`` never raises the energy, so minimizers can be taken
    nonnegative.
    """

    def __init__(self, grid: RadialGrid, params: PhysicalParams, mu=0.0):
        params.require_atomic()
        self.grid = grid
        self.params = params
        self.mu = float(mu)
        self.Z = params.Z
        self.lam = params.lam
        self.alpha = params.alpha_s

    def parts(self, chi):
        """Return (breakdown, particle_number, p, rho, phi) for a full nodal chi."""
        g = self.grid
        p = fermi_momentum(np.abs(chi))
        rho = density(p)
        phi = hartree_potential(g, rho)
        ew = 3.0 * self.lam / (8.0 * PI2) * float(np.dot(g.stiffness, np.diff(chi) ** 2))
        etf = g.integrate(_t_tf_raw(p)) / (8.0 * PI2)
        eext = -self.alpha * self.Z * g.integrate(rho / g.r)
        eh = 0.5 * self.alpha * float(np.dot(g.w * rho, phi))
        br = EnergyBreakdown.from_parts(ew, etf, eext, eh, self.params.nuclear_repulsion())
        return br, g.integrate(rho), p, rho, phi

    def nodal_gradient(self, chi, p=None, phi=None, mu=None):
        """``dL/dchi_i`` (not divided by the weights); Dirichlet node zeroed."""
        g = self.grid
        mu = self.mu if mu is None else mu
        if p is None:
            p = fermi_momentum(np.abs(chi))
        if phi is None:
            phi = hartree_potential(g, density(p))
        pot = -self.alpha * self.Z / g.r + self.alpha * phi + mu
        local = _ttf_prime_over_f(p) / (8.0 * PI2) + _p2_over_f(p) * pot / PI2
        grad = 3.0 * self.lam / (8.0 * PI2) * g.stiffness_apply(chi) + g.w * local * np.sign(chi)
        grad[-1] = 0.0
        return grad

    def lagrangian_and_gradient(self, x):
        """Lagrangian and nodal gradient in the free variables (all but the last node)."""
        chi = np.append(x, 0.0)
        br, npart, p, rho, phi = self.parts(chi)
        grad = self.nodal_gradient(chi, p, phi)
        return br.total + self.mu * npart, grad[:-1]

    def hessian_vector(self, x, v):
        """Exact Hessian of the Lagrangian at free variables ``x >= 0`` applied to ``v``."""
        g = self.grid
        chi = np.append(x, 0.0)
        vv = np.append(v, 0.0)
        p = fermi_momentum(chi)
        phi = hartree_potential(g, density(p))
        pot = -self.alpha * self.Z / g.r + self.alpha * phi + self.mu
        drho = _p2_over_f(p) / PI2
        out = 3.0 * self.lam / (8.0 * PI2) * g.stiffness_apply(vv)
        out += g.w * _local_curvature(p, pot) * vv
        out += self.alpha * g.w * drho * hartree_potential(g, drho * vv)
        return out[:-1]

    def curvature_diagonal(self, chi):
        """Positive diagonal estimate of the local Hessian per unit weight."""
        g = self.grid
        p = fermi_momentum(np.abs(chi))
        phi = hartree_potential(g, density(p))
        return (1.5 / PI2) * (self.alpha * self.Z / g.r + self.alpha * phi + self.mu) + (
            7.0 / (4.0 * PI2)
        ) * p * p


def evaluate_energy(chi, grid, params):
    """Energy breakdown of a nonnegative nodal chi-field."""
    chi = check_chi(chi, grid)
    br, *_ = Functional(grid, params).parts(chi)
    if not math.isfinite(br.total):
        raise FloatingPointError("energy evaluation produced a non-finite value")
    return br


def particle_number(chi, grid):
    chi = check_chi(chi, grid)
    return grid.integrate(density(fermi_momentum(chi)))


def energy_gradient(chi, grid, params, mu=0.0):
    """Variational derivative of the discrete energy, per unit weight.

    Returns ``(dE/dchi_i) / w_i``, the discrete counterpart of
    ``-(3 lam/4 pi^2) Lap chi + (1/8 pi^2) t'(p)/f(p) - (alpha Z/pi^2) p^2/(f r)
    + (alpha/pi^2) p^2 Phi / f`` (plus ``mu p^2/(pi^2 f)`` when ``mu`` is
    given). The Dirichlet node at ``r_max`` carries zero. Directional
    derivatives are ``sum(w * gradient * v)``.
    """
    chi = check_chi(chi, grid)
    return Functional(grid, params, mu).nodal_gradient(chi) / grid.w
