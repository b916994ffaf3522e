"""Cut-off radii: minimizers of the two convex one-dimensional objectives

    F_beta(r)             = 1/(r arsinh(r)^3) + r/beta
    F_tilde_{alpha,beta}  = piecewise in r around R_beta

used to split the integral of p^5 in the stability estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

__all__ = [
    "CutoffResult",
    "F_beta",
    "F_beta_prime",
    "R_of_beta",
    "F_tilde",
    "F_tilde_prime",
    "R_tilde",
    "beta_of_R",
]

_BRACKET = (1e-12, 1e12)
_RTOL = 1e-14


@dataclass(frozen=True)
class CutoffResult:
    beta: float
    alpha: float
    r_min: float
    value: float


def _positive(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")


def F_beta(r, beta):
    _positive(r=r, beta=beta)
    return 1.0 / (r * math.asinh(r) ** 3) + r / beta


def F_beta_prime(r, beta):
    _positive(r=r, beta=beta)
    a = math.asinh(r)
    return -1.0 / (r * r * a**3) - 3.0 / (r * a**4 * math.sqrt(1.0 + r * r)) + 1.0 / beta


def _find_root(fun, lo, hi):
    # expand geometrically until the derivative changes sign
    flo, fhi = fun(lo), fun(hi)
    for _ in range(200):
        if flo < 0 < fhi:
            return brentq(fun, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=500)
        if flo >= 0:
            lo *= 1e-3
            flo = fun(lo)
        if fhi <= 0:
            hi *= 1e3
            fhi = fun(hi)
    raise RuntimeError("no sign change bracket for the cut-off derivative")


def R_of_beta(beta):
    """Unique minimizer ``R_beta`` of ``F_beta``."""
    _positive(beta=beta)
    r = _find_root(lambda x: F_beta_prime(x, beta), *_BRACKET)
    return CutoffResult(beta, beta, r, F_beta(r, beta))


def beta_of_R(R):
    """Inverse of :func:`R_of_beta`, explicit from ``F_beta'(R) = 0``."""
    _positive(R=R)
    a = math.asinh(R)
    return 1.0 / (1.0 / (R * R * a**3) + 3.0 / (R * a**4 * math.sqrt(1.0 + R * R)))


def _resolve_R(beta, R_beta):
    return R_of_beta(beta).r_min if R_beta is None else R_beta


def F_tilde(r, alpha, beta, R_beta=None):
    """Piecewise objective; at ``r == R_beta`` the outer branch is used."""
    _positive(r=r, alpha=alpha, beta=beta)
    Rb = _resolve_R(beta, R_beta)
    a = math.asinh(Rb)
    if r >= Rb:
        return 1.0 / (r * a**3) + r / alpha
    return (Rb / a) ** 3 / r**4 + r / alpha


def F_tilde_prime(r, alpha, beta, R_beta=None):
    """One-sided derivative; the outer branch is used at ``r == R_beta``."""
    _positive(r=r, alpha=alpha, beta=beta)
    Rb = _resolve_R(beta, R_beta)
    a = math.asinh(Rb)
    if r >= Rb:
        return -1.0 / (r * r * a**3) + 1.0 / alpha
    return -4.0 / r**5 * (Rb / a) ** 3 + 1.0 / alpha


def R_tilde(alpha, beta):
    """Unique minimizer of ``F_tilde_{alpha,beta}``.

    Each branch has an explicit stationary point; the one lying on its own
    side of ``R_beta`` is the minimizer. If neither does, the kink at
    ``R_beta`` is the minimizer (derivative changes sign across the jump).
    """
    _positive(alpha=alpha, beta=beta)
    Rb = R_of_beta(beta).r_min
    a = math.asinh(Rb)
    outer = math.sqrt(alpha / a**3)
    inner = (4.0 * alpha * (Rb / a) ** 3) ** 0.2
    candidates = []
    if outer >= Rb:
        candidates.append(outer)
    if inner < Rb:
        candidates.append(inner)
    if len(candidates) == 1:
        r = candidates[0]
    elif not candidates:
        r = Rb
    else:
        # both stationary points on their own side contradicts strict convexity
        # unless they coincide with the kink to rounding
        if abs(outer - inner) > 1e-9 * Rb:
            raise RuntimeError("inconsistent branches in R_tilde")
        r = Rb
    # the alpha == beta case is pinned to the kink: R_tilde(beta, beta) = R_beta
    if abs(r - Rb) <= 1e-12 * Rb:
        r = Rb
    return CutoffResult(beta, alpha, r, F_tilde(r, alpha, beta, Rb))
