"""Explicit lower bound ``inf E >= -N - C(A)`` for the relativistic TFW functional.

Chain of estimates: the Teller aggregate ``A = e_tf sum Z_k^{7/3}``, the
Sobolev step with constant ``c_s``, a cut-off parameter ``beta`` chosen
so that the first case of the split estimate is bounded by ``-N``, and the
optimization over ``T = int p^4`` in the second case, which yields ``C(A)``.

``R_beta`` grows like ``sinh`` of a power of ``A``, so beta-dependent
quantities are carried in logarithms; ``beta_star`` and ``R_beta_star``
may be reported as ``inf`` for large ``A`` while ``C(A)`` stays finite.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .cutoff_radii import R_of_beta, beta_of_R
from .params import ALPHA_PHYSICAL
from .special_functions import minimize_H
from .thomas_fermi import e_tf as _e_tf

SCHEMA = "reltfw.stability_report/1"
C_SOBOLEV = 3.0 * (math.pi / 2.0) ** (4.0 / 3.0)
PI2 = math.pi**2


def teller_constant(Z_list):
    """``(A, e_tf)`` with ``A = e_tf * sum Z_k^{7/3}``."""
    Z = [float(z) for z in Z_list]
    if any(not math.isfinite(z) or z < 0 for z in Z):
        raise ValueError("nuclear charges must be nonnegative")
    e = _e_tf()
    return e * math.fsum(z ** (7.0 / 3.0) for z in Z), e


def _log_sinh(a):
    if a > 1.0:
        return a - math.log(2.0) + math.log1p(-math.exp(-2.0 * a))
    return math.log(math.sinh(a))


def _log_cosh(a):
    return a - math.log(2.0) + math.log1p(math.exp(-2.0 * a))


def _level(lam):
    """Left side of the beta condition: ``min(lam c_s/(8 pi^2), 1/pi^2)``."""
    return min(lam * C_SOBOLEV / (8.0 * PI2), 1.0 / PI2)


def _condition_rhs(asinh_R, A):
    return math.sqrt(3.0 * A / (5.0 * math.sqrt(2.0 * asinh_R**3)))


@dataclass(frozen=True)
class BetaChoice:
    asinh_R: float  # arsinh(R_beta)
    log_R: float
    log_beta: float

    @property
    def R(self):
        return math.exp(self.log_R) if self.log_R < 709.0 else math.inf

    @property
    def beta(self):
        return math.exp(self.log_beta) if self.log_beta < 709.0 else math.inf


def select_beta(lam, A):
    """Cut-off parameter making both first-case coefficients nonnegative.

    Solves ``min(lam c_s/(8 pi^2), 1/pi^2) = sqrt(3A / (5 sqrt(2 arsinh(R)^3)))``.
    The right side is strictly decreasing in ``R``, so the solution is
    unique and explicit: ``arsinh R = (3A / (5 sqrt2 L^2))^{2/3}``. Then
    ``beta`` follows from ``F_beta'(R) = 0``. Returns None for ``A = 0``.
    """
    if not (math.isfinite(lam) and lam > 0):
        raise ValueError("lambda must be positive")
    if not (math.isfinite(A) and A >= 0):
        raise ValueError("A must be nonnegative")
    if A == 0:
        return None
    L = _level(lam)
    a = (3.0 * A / (5.0 * math.sqrt(2.0) * L * L)) ** (2.0 / 3.0)
    log_R = _log_sinh(a)
    # 1/beta = 1/(R^2 a^3) + 3/(R a^4 sqrt(1+R^2))
    t1 = -2.0 * log_R - 3.0 * math.log(a)
    t2 = math.log(3.0) - log_R - 4.0 * math.log(a) - _log_cosh(a)
    m = max(t1, t2)
    log_inv_beta = m + math.log(math.exp(t1 - m) + math.exp(t2 - m))
    return BetaChoice(a, log_R, -log_inv_beta)


def beta_condition_residual(lam, A, choice):
    """Relative residual of the beta condition at ``choice``."""
    L = _level(lam)
    return abs(_condition_rhs(choice.asinh_R, A) - L) / L


def first_case_coefficients(lam, A, alpha_s, choice):
    """Coefficients of ``W^{1/3}`` and ``T`` in the first case after the attraction.

    The attraction coefficient is ``2 alpha_s sqrt(3A/5) / arsinh(R)^{3/4}``
    as produced by AM-GM on ``(W T)^{1/4}``; it exceeds the level fixed by
    the beta condition by the factor ``2^{1/4}``, so these coefficients are
    the conservative ones.
    """
    k = 0.0 if choice is None else math.sqrt(3.0 * A / 5.0) / choice.asinh_R**0.75
    w = 3.0 * lam * C_SOBOLEV / (32.0 * PI2) - 2.0 * alpha_s * k * 0.75
    t = 1.0 / (4.0 * PI2) - 2.0 * alpha_s * k * 0.25
    return w, t


def log_C_of_A(A, lam=1.0, alpha_s=ALPHA_PHYSICAL):
    """``log C(A)``; ``-inf`` for ``A = 0``."""
    choice = select_beta(lam, A)
    if choice is None:
        return -math.inf
    # (beta R^3 / arsinh(R)^3)^{1/5}
    log_q = (choice.log_beta + 3.0 * choice.log_R - 3.0 * math.log(choice.asinh_R)) / 5.0
    # b^2 = 4 alpha^2 (3/2) A 4^{-4/5} q and C = b^2 / (4a) with a = 1/(4 pi^2)
    return math.log(4.0 * alpha_s**2 * 1.5 * A * 4.0 ** (-0.8) * PI2) + log_q


def C_of_A(A, lam=1.0, alpha_s=ALPHA_PHYSICAL):
    """``C(A) = b^2/(4a)`` with ``a = 1/(4 pi^2)`` and ``b`` the square-root coefficient.

    Returns ``inf`` when the value exceeds the float range.
    """
    lc = log_C_of_A(A, lam, alpha_s)
    return math.exp(lc) if lc < 709.0 else math.inf


@dataclass(frozen=True)
class StabilityReport:
    lam: float
    alpha_s: float
    N: float
    A: float
    e_tf: float
    c_s: float
    beta_star: float
    R_beta_star: float
    log_beta_star: float
    log_R_beta_star: float
    asinh_R_beta_star: float
    condition_residual: float
    condition_level: float  # min(lam c_s / 8 pi^2, 1/pi^2)
    condition_branch: str  # "sobolev" or "kinetic", whichever attains the min
    first_case_W_coefficient: float
    first_case_T_coefficient: float
    C_of_A: float
    log_C_of_A: float
    lower_bound: float
    Z_inf: float
    K: int
    A_inf: float
    C_uniform: float  # C(e_tf Z_inf^{7/3} K)
    log_C_uniform: float
    d_uniform: float  # 2/sqrt(a) Z_inf K + C_uniform
    uniform_lower_bound: float

    def to_dict(self):
        d = {k: (v if not isinstance(v, float) or math.isfinite(v) else None)
             for k, v in asdict(self).items()}
        d["lambda"] = d.pop("lam")
        d["schema"] = SCHEMA
        return d


def stability_constant(lam=1.0, Z_list=(1.0,), Z_inf=None, K=None, N=1.0,
                       alpha_s=ALPHA_PHYSICAL):
    """Assemble the lower bound for the given charges and its uniform version.

    ``lower_bound = -N - C(A)``: the first case is bounded by ``-N`` once
    beta is chosen, the second by ``-N - C(A)``, and the smaller of the two
    is reported. The uniform constants use ``A <= e_tf Z_inf^{7/3} K`` and,
    for the N-free form, ``N <= (2/sqrt(a)) Z_inf K``.
    """
    Z_list = tuple(float(z) for z in Z_list)
    if not (math.isfinite(N) and N >= 0):
        raise ValueError("N must be nonnegative")
    if not (math.isfinite(alpha_s) and alpha_s > 0):
        raise ValueError("alpha_s must be positive")
    A, e = teller_constant(Z_list)
    if K is None:
        K = max(len(Z_list), 1)
    if Z_inf is None:
        Z_inf = max(Z_list, default=0.0)
    if int(K) != K or K < 1:
        raise ValueError("K must be a positive integer")
    if any(z > Z_inf for z in Z_list):
        raise ValueError("every charge must be at most Z_inf")
    if len(Z_list) > K:
        raise ValueError("more charges than K")
    choice = select_beta(lam, A)
    wc, tc = first_case_coefficients(lam, A, alpha_s, choice)
    C = C_of_A(A, lam, alpha_s)
    first = -N if (wc >= 0 and tc >= 0) else -math.inf
    bound = min(first, -N - C)
    A_inf = e * Z_inf ** (7.0 / 3.0) * K
    C_unif = C_of_A(A_inf, lam, alpha_s)
    coef = 2.0 / math.sqrt(minimize_H().a)
    d = coef * Z_inf * K + C_unif
    nan = math.nan
    return StabilityReport(
        lam=float(lam),
        alpha_s=float(alpha_s),
        N=float(N),
        A=A,
        e_tf=e,
        c_s=C_SOBOLEV,
        beta_star=0.0 if choice is None else choice.beta,
        R_beta_star=0.0 if choice is None else choice.R,
        log_beta_star=-math.inf if choice is None else choice.log_beta,
        log_R_beta_star=-math.inf if choice is None else choice.log_R,
        asinh_R_beta_star=0.0 if choice is None else choice.asinh_R,
        condition_residual=nan if choice is None else beta_condition_residual(lam, A, choice),
        condition_level=_level(lam),
        condition_branch="sobolev" if lam * C_SOBOLEV / 8.0 <= 1.0 else "kinetic",
        first_case_W_coefficient=wc,
        first_case_T_coefficient=tc,
        C_of_A=C,
        log_C_of_A=log_C_of_A(A, lam, alpha_s),
        lower_bound=bound,
        Z_inf=float(Z_inf),
        K=int(K),
        A_inf=A_inf,
        C_uniform=C_unif,
        log_C_uniform=log_C_of_A(A_inf, lam, alpha_s),
        d_uniform=d,
        uniform_lower_bound=0.0 - d,
    )


def round_trip_error(lam, A):
    """Relative mismatch ``|R_of_beta(beta*) - R*| / R*`` (finite ``R*`` only)."""
    choice = select_beta(lam, A)
    R = choice.R
    return abs(R_of_beta(choice.beta).r_min - R) / R


__all__ = [
    "C_SOBOLEV",
    "BetaChoice",
    "StabilityReport",
    "C_of_A",
    "log_C_of_A",
    "beta_condition_residual",
    "beta_of_R",
    "first_case_coefficients",
    "round_trip_error",
    "select_beta",
    "stability_constant",
    "teller_constant",
]
