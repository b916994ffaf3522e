"""Constrained minimization of the atomic TFW functional in the chi-field.

The particle-number constraint ``int rho <= N`` is handled by an outer
search on the chemical potential ``mu >= 0``: for fixed ``mu`` the
Lagrangian ``E + mu int rho`` is minimized without constraint, and ``mu``
is bracketed and bisected (with false-position steps) until the particle
number matches ``N``. If the free minimizer (``mu = 0``) already holds at
most ``N`` particles the constraint is inactive.

Inner solves use L-BFGS whose initial inverse Hessian is the tridiagonal
operator ``(3 lam / 4 pi^2) K + diag(w d)``, with ``K`` the Weizsacker
stiffness matrix; this removes the ``1/r^2`` stiffness of the log grid.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solveh_banded

from ..params import PhysicalParams
from ..special_functions import get_table
from .functional import (
    P_FLOOR,
    PI2,
    EnergyBreakdown,
    Functional,
    density,
    fermi_momentum,
    hartree_potential,
)
from .grid import RadialGrid, default_grid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8  # relative dual gradient norm
    n_tol: float = 1e-6  # relative particle-number tolerance
    maxiter: int = 5000  # per inner solve
    memory: int = 10
    newton_switch: float = 1e-5  # hand over from L-BFGS to Newton-CG below this
    newton_steps: int = 30
    polish_tol: float = 1e-8  # Euler residual targeted by the Newton stage
    max_mu_steps: int = 80
    refresh_every: int = 100  # preconditioner rebuild period
    residual_tol: float = 1e-5


@dataclass
class InnerResult:
    x: np.ndarray
    lagrangian: float
    grad_norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class MinimizeResult:
    chi: np.ndarray
    energy: EnergyBreakdown
    particle_number: float
    multiplier: float
    euler_residual: float
    grad_norm: float
    iterations: int
    converged: bool
    constraint_active: bool
    grid: RadialGrid = field(repr=False)
    params: PhysicalParams = field(repr=False)
    history: list = field(default_factory=list, repr=False)

    @property
    def p(self):
        return fermi_momentum(self.chi)

    @property
    def rho(self):
        return density(self.p)

    def profile(self):
        """Columns ``r, chi, p, rho, hartree_potential`` as a 2-d array."""
        p = self.p
        rho = density(p)
        phi = hartree_potential(self.grid, rho)
        return np.column_stack([self.grid.r, self.chi, p, rho, self.params.alpha_s * phi])

    def to_dict(self, include_chi=False):
        out = {
            "params": self.params.to_dict(),
            "grid": {"n": self.grid.n, "r_min": self.grid.r_min, "r_max": self.grid.r_max},
            "energy": self.energy.to_dict(),
            "particle_number": self.particle_number,
            "multiplier": self.multiplier,
            "euler_residual": self.euler_residual,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "constraint_active": self.constraint_active,
        }
        if include_chi:
            out["chi"] = self.chi.tolist()
        return out


class _Preconditioner:
    def __init__(self, functional: Functional, x):
        g = functional.grid
        chi = np.append(x, 0.0)
        d = functional.curvature_diagonal(chi)
        c = 3.0 * functional.lam / (4.0 * PI2)
        diag = g.w * d
        diag[:-1] += c * g.stiffness
        diag[1:] += c * g.stiffness
        m = len(x)
        ab = np.zeros((2, m))
        ab[1] = diag[:m]
        ab[0, 1:] = -c * g.stiffness[: m - 1]
        self.ab = ab

    def __call__(self, v):
        return solveh_banded(self.ab, v, check_finite=False)


def _scale(functional, x):
    br, npart, *_ = functional.parts(np.append(x, 0.0))
    return (
        abs(br.weizsacker) + abs(br.thomas_fermi) + abs(br.external) + abs(br.hartree)
        + abs(functional.mu * npart)
    )


def lbfgs(functional: Functional, x0, options: SolverOptions, tol=None):
    """Minimize the Lagrangian from ``x0`` (free nodes only).

    Accepted steps satisfy the Armijo condition, so the recorded history is
    strictly decreasing. ``grad_norm`` is ``sqrt(g^T P^{-1} g / scale)``,
    where ``scale`` is the sum of magnitudes of the energy terms; its
    square estimates the relative energy error.
    """
    tol = options.tol if tol is None else tol
    x = np.array(x0, dtype=float)
    L, gr = functional.lagrangian_and_gradient(x)
    hist = [L]
    S, Y = deque(maxlen=options.memory), deque(maxlen=options.memory)
    P = _Preconditioner(functional, x)
    scale = _scale(functional, x)
    gnorm = math.inf
    converged = False
    it = 0
    for it in range(1, options.maxiter + 1):
        pg = P(gr)
        dual2 = float(gr @ pg)
        gnorm = math.sqrt(max(dual2, 0.0) / scale) if scale > 0 else math.sqrt(max(dual2, 0.0))
        if gnorm <= tol or dual2 == 0.0:
            converged = True
            break
        # two-loop recursion with H0 = gamma P^{-1}
        q = gr.copy()
        alphas = []
        for s, y in reversed(list(zip(S, Y))):
            a = (s @ q) / (y @ s)
            alphas.append(a)
            q -= a * y
        z = P(q)
        if S:
            y = Y[-1]
            z *= (S[-1] @ y) / (y @ P(y))
        for (s, y), a in zip(zip(S, Y), reversed(alphas)):
            b = (y @ z) / (y @ s)
            z += (a - b) * s
        d = -z
        slope = float(gr @ d)
        if not slope < 0:
            S.clear()
            Y.clear()
            d = -pg
            slope = -dual2
        t = 1.0
        accepted = False
        while t >= 1e-14:
            Ln, gn = functional.lagrangian_and_gradient(x + t * d)
            if math.isfinite(Ln) and Ln <= L + 1e-4 * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if S:
                # drop curvature memory and retry along the preconditioned gradient
                S.clear()
                Y.clear()
                continue
            break
        s = t * d
        y = gn - gr
        if s @ y > 0:
            S.append(s)
            Y.append(y)
        x = x + s
        L, gr = Ln, gn
        hist.append(L)
        if it % options.refresh_every == 0:
            P = _Preconditioner(functional, x)
            scale = _scale(functional, x)
    return InnerResult(x, L, gnorm, it, converged, hist)


def _pcg(hv, b, P, rtol=1e-10, maxiter=300):
    """Preconditioned CG for ``H d = b``; stops early on nonpositive curvature."""
    x = np.zeros_like(b)
    r = b.copy()
    z = P(r)
    d = z.copy()
    rz = float(r @ z)
    r0 = math.sqrt(max(rz, 0.0))
    for i in range(maxiter):
        Hd = hv(d)
        dHd = float(d @ Hd)
        if dHd <= 0:
            return x if i else z
        a = rz / dHd
        x += a * d
        r -= a * Hd
        z = P(r)
        rz_new = float(r @ z)
        if math.sqrt(max(rz_new, 0.0)) <= rtol * r0:
            break
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x


def _relative_residual(functional, chi, grad=None):
    g = functional.grid
    p = fermi_momentum(chi)
    mask = p > P_FLOOR
    mask[-1] = False
    if not np.any(mask):
        return 0.0
    if grad is None:
        grad = functional.nodal_gradient(chi, p)
    else:
        grad = np.append(grad, 0.0)
    kin = (3.0 * functional.lam / (8.0 * PI2)) * g.stiffness_apply(chi)
    w = g.w[mask]
    num = math.sqrt(float(np.sum(grad[mask] ** 2 / w)))
    den = math.sqrt(float(np.sum(kin[mask] ** 2 / w)))
    return num / den if den > 0 else num


def newton(functional: Functional, x0, options: SolverOptions):
    """Newton-CG refinement with the exact Hessian, preconditioned like L-BFGS.

    Near the minimizer the energy decrease of a step falls below rounding
    of the energy itself, so a step is also accepted when the energy does
    not rise beyond ``1e-12`` of the energy scale and the relative Euler
    residual drops.
    """
    x = np.abs(np.asarray(x0, dtype=float))
    L, gr = functional.lagrangian_and_gradient(x)
    hist = []
    scale = _scale(functional, x)
    res = _relative_residual(functional, np.append(x, 0.0), gr)
    gnorm = math.inf
    it = 0
    for it in range(1, options.newton_steps + 1):
        P = _Preconditioner(functional, x)
        pg = P(gr)
        dual2 = float(gr @ pg)
        gnorm = math.sqrt(max(dual2, 0.0) / scale) if scale > 0 else math.sqrt(max(dual2, 0.0))
        if dual2 == 0.0 or (gnorm <= options.tol and res <= options.polish_tol):
            break
        d = _pcg(lambda v: functional.hessian_vector(x, v), -gr, P)
        slope = float(gr @ d)
        if not slope < 0:
            d, slope = -pg, -dual2
        t = 1.0
        accepted = False
        while t >= 1e-6:
            xn = x + t * d
            Ln, gn = functional.lagrangian_and_gradient(xn)
            if math.isfinite(Ln):
                if Ln <= L + 1e-4 * t * slope:
                    accepted = True
                elif Ln <= L + 1e-12 * scale:
                    rn = _relative_residual(functional, np.append(np.abs(xn), 0.0))
                    accepted = rn < res
            if accepted:
                break
            t *= 0.5
        if not accepted:
            break
        if np.any(xn < 0):
            xn = np.abs(xn)
            Ln, gn = functional.lagrangian_and_gradient(xn)
        x, L, gr = xn, Ln, gn
        hist.append(L)
        res = _relative_residual(functional, np.append(x, 0.0), gr)
    else:
        pg = _Preconditioner(functional, x)(gr)
        dual2 = float(gr @ pg)
        gnorm = math.sqrt(max(dual2, 0.0) / scale) if scale > 0 else math.sqrt(max(dual2, 0.0))
    return InnerResult(x, L, gnorm, it, gnorm <= options.tol, hist)


def inner_solve(functional: Functional, x0, options: SolverOptions):
    """L-BFGS down to ``newton_switch``, then Newton-CG; L-BFGS again if Newton stalls."""
    first = lbfgs(functional, x0, options, tol=max(options.tol, options.newton_switch))
    hist = list(first.history)
    second = newton(functional, first.x, options)
    hist += second.history
    its = first.iterations + second.iterations
    if second.converged:
        return InnerResult(second.x, second.lagrangian, second.grad_norm, its, True, hist)
    third = lbfgs(functional, second.x, options)
    hist += third.history[1:]
    its += third.iterations
    return InnerResult(third.x, third.lagrangian, third.grad_norm, its, third.converged, hist)


def hydrogenic_guess(grid: RadialGrid, params: PhysicalParams):
    """chi from ``rho0 = N (Z alpha)^3 / pi exp(-2 Z alpha r)`` (Compton units)."""
    k = params.Z * params.alpha_s
    rho0 = params.N * k**3 / math.pi * np.exp(-2.0 * k * grid.r)
    chi = get_table().F(np.cbrt(3.0 * PI2 * rho0))
    chi[-1] = 0.0
    return chi


def euler_residual(result: MinimizeResult, grid=None, params=None):
    """Relative stationarity residual of a minimization result.

    The weighted L2 norm of ``(dL/dchi)/w`` (Lagrangian including the
    multiplier) over nodes with ``p > P_FLOOR``, divided by the same norm of
    the Weizsacker part alone. Zero for the vacuum.
    """
    grid = result.grid if grid is None else grid
    params = result.params if params is None else params
    chi = np.abs(np.asarray(result.chi, dtype=float))
    return _relative_residual(Functional(grid, params, result.multiplier), chi)


def _finish(functional, inner, grid, params, mu, active, iterations, converged, history):
    chi = np.abs(np.append(inner.x, 0.0))
    br, npart, *_ = functional.parts(chi)
    res = MinimizeResult(
        chi=chi,
        energy=br,
        particle_number=npart,
        multiplier=float(mu),
        euler_residual=0.0,
        grad_norm=inner.grad_norm,
        iterations=iterations,
        converged=converged,
        constraint_active=active,
        grid=grid,
        params=params,
        history=history,
    )
    res.euler_residual = euler_residual(res)
    return res


def minimize(params: PhysicalParams, grid: RadialGrid = None, options: SolverOptions = None,
             chi0=None):
    """Minimize the atomic functional subject to ``int rho <= N``.

    Returns a :class:`MinimizeResult`; ``converged`` is False whenever an
    inner solve or the multiplier search did not meet its tolerance.
    """
    params.require_atomic()
    grid = default_grid(params.alpha_s) if grid is None else grid
    opts = SolverOptions() if options is None else options
    N = params.N
    if chi0 is None:
        chi0 = hydrogenic_guess(grid, params)
    chi0 = np.abs(np.asarray(chi0, dtype=float))
    if chi0.shape != grid.r.shape:
        raise ValueError("chi0 does not match the grid")

    if N == 0.0 or params.Z == 0.0 and not np.any(chi0):
        # vacuum: every term is nonnegative or vanishes with chi
        fn = Functional(grid, params, 0.0)
        inner = InnerResult(np.zeros(grid.n - 1), 0.0, 0.0, 0, True, [0.0])
        return _finish(fn, inner, grid, params, 0.0, N == 0.0 and params.Z > 0, 0, True, [[0.0]])

    histories = []
    total_it = 0
    fn0 = Functional(grid, params, 0.0)
    free = inner_solve(fn0, chi0[:-1], opts)
    histories.append(free.history)
    total_it += free.iterations
    n_free = fn0.parts(np.append(free.x, 0.0))[1]
    if n_free <= N * (1.0 + opts.n_tol):
        return _finish(fn0, free, grid, params, 0.0, False, total_it, free.converged, histories)

    # bracket mu: N(mu) is nonincreasing
    def solve_at(mu, x_start):
        fn = Functional(grid, params, mu)
        inner = inner_solve(fn, x_start, opts)
        histories.append(inner.history)
        npart = fn.parts(np.append(inner.x, 0.0))[1]
        return fn, inner, npart

    lo_mu, lo_x, lo_f = 0.0, free.x, n_free - N
    hi_mu = max(params.alpha_s**2 * max(params.Z, 1.0) ** (4.0 / 3.0) * 1e-2, 1e-300)
    all_ok = free.converged
    hi = None
    for _ in range(200):
        fn, inner, npart = solve_at(hi_mu, lo_x)
        total_it += inner.iterations
        all_ok &= inner.converged
        if npart - N <= 0:
            hi = (hi_mu, inner.x, npart - N, fn, inner)
            break
        lo_mu, lo_x, lo_f = hi_mu, inner.x, npart - N
        hi_mu *= 4.0
    if hi is None:
        raise RuntimeError("could not bracket the chemical potential")
    hi_mu, hi_x, hi_f, best_fn, best = hi
    best_f = hi_f
    if abs(lo_f) < abs(best_f) and lo_mu > 0:
        best_fn, best_f = Functional(grid, params, lo_mu), lo_f
        best = InnerResult(lo_x, 0.0, 0.0, 0, True)
    side = 0
    for _ in range(opts.max_mu_steps):
        if abs(best_f) <= opts.n_tol * N:
            break
        # Illinois false position; bisection if the estimate leaves the bracket
        denom = hi_f - lo_f
        mu = hi_mu - hi_f * (hi_mu - lo_mu) / denom if denom != 0 else 0.5 * (lo_mu + hi_mu)
        if not (lo_mu < mu < hi_mu):
            mu = 0.5 * (lo_mu + hi_mu)
        start = lo_x if abs(mu - lo_mu) < abs(hi_mu - mu) else hi_x
        fn, inner, npart = solve_at(mu, start)
        total_it += inner.iterations
        all_ok &= inner.converged
        fval = npart - N
        if abs(fval) < abs(best_f) or best.grad_norm == 0.0:
            best_fn, best, best_f = fn, inner, fval
        if fval > 0:
            lo_mu, lo_x, lo_f = mu, inner.x, fval
            if side == 1:
                hi_f *= 0.5
            side = 1
        else:
            hi_mu, hi_x, hi_f = mu, inner.x, fval
            if side == -1:
                lo_f *= 0.5
            side = -1
        if hi_mu - lo_mu <= 1e-15 * hi_mu:
            break
    if best.grad_norm == 0.0 and best.iterations == 0:
        best = inner_solve(best_fn, best.x, opts)
    ok = all_ok and best.converged and abs(best_f) <= opts.n_tol * N
    return _finish(best_fn, best, grid, params, best_fn.mu, True, total_it, ok, histories)


@dataclass
class IonizationLeg:
    N: float
    bound: bool
    particle_number: float
    multiplier: float
    converged: bool
    indeterminate: bool = False
    energy: float = math.nan


@dataclass
class IonizationScan:
    Z: float
    N_max: float
    tolerance: float
    free_particle_number: float
    legs: list
    converged: bool

    def to_dict(self):
        return {
            "Z": self.Z,
            "N_max": self.N_max,
            "tolerance": self.tolerance,
            "free_particle_number": self.free_particle_number,
            "converged": self.converged,
            "legs": [vars(leg) for leg in self.legs],
        }


def find_max_ionization(Z, lam=1.0, alpha_s=None, grid=None, options=None, rel_tol=1e-3):
    """Largest N whose constrained minimizer holds exactly N particles.

    Bisection on ``[Z, 4Z]`` to width ``rel_tol * Z``. Each leg is a full
    constrained solve warm-started from the free minimizer; a leg that fails
    to converge is retried once with a tenfold tighter tolerance and, if it
    still fails, recorded as indeterminate and treated as unbound.
    """
    from ..params import ALPHA_PHYSICAL

    if not (Z > 0):
        raise ValueError("Z must be positive")
    alpha_s = ALPHA_PHYSICAL if alpha_s is None else alpha_s
    grid = default_grid(alpha_s) if grid is None else grid
    opts = SolverOptions() if options is None else options

    free_params = PhysicalParams(lam=lam, alpha_s=alpha_s, Z_list=(Z,), N=4.0 * Z)
    free = minimize(free_params, grid, opts)
    legs = []
    ok = free.converged

    def bound_at(N):
        nonlocal ok
        p = replace(free_params, N=N)
        res = minimize(p, grid, opts, chi0=free.chi)
        if not res.converged:
            res = minimize(p, grid, replace(opts, tol=opts.tol / 10, maxiter=opts.maxiter * 4),
                           chi0=free.chi)
        leg = IonizationLeg(N, False, res.particle_number, res.multiplier, res.converged,
                            not res.converged, res.energy.total)
        leg.bound = res.converged and abs(res.particle_number - N) <= max(opts.n_tol, 1e-6) * N * 10
        legs.append(leg)
        ok &= res.converged
        return leg.bound

    lo, hi = Z, 4.0 * Z
    if not bound_at(lo):
        hi, lo = lo, 0.0
    elif bound_at(hi):
        return IonizationScan(Z, hi, rel_tol * Z, free.particle_number, legs, ok)
    while hi - lo > rel_tol * Z:
        mid = 0.5 * (lo + hi)
        if bound_at(mid):
            lo = mid
        else:
            hi = mid
    return IonizationScan(Z, lo, rel_tol * Z, free.particle_number, legs, ok)


def _scan_one(args):
    Z, lam, alpha_s, n, opts = args
    grid = default_grid(alpha_s, n=n)
    return find_max_ionization(Z, lam, alpha_s, grid, opts)


def scan_max_ionization(Z_values, lam=1.0, alpha_s=None, n=2000, options=None, jobs=1):
    """Run :func:`find_max_ionization` for several charges, optionally in parallel.

    Results come back in the order of ``Z_values`` regardless of scheduling.
    """
    from ..params import ALPHA_PHYSICAL

    alpha_s = ALPHA_PHYSICAL if alpha_s is None else alpha_s
    opts = SolverOptions() if options is None else options
    tasks = [(float(Z), lam, alpha_s, n, opts) for Z in Z_values]
    if jobs <= 1 or len(tasks) <= 1:
        return [_scan_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_scan_one, tasks))
