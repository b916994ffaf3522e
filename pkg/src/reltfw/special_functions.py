"""
Scalar special functions of the relativistic TFW model.

All quantities are dimensionless: momenta in units of ``mc``, energies in
units of ``mc^2``.

Functions
---------
* :func:`f` : square root of the Weizsacker weight, closed form
* :func:`F` : antiderivative of ``f`` (table fast path or direct quadrature)
* :func:`F_inverse` : inverse of ``F``
* :func:`t_tf` : relativistic Thomas-Fermi kinetic energy density
* :func:`H` : ``F(s) / (s f(s))``, whose infimum controls the ionization bound
* :func:`g` : positivity function entering the lower ionization bound
* :func:`minimize_H`, :func:`min_g` : one-dimensional extremal values
* :func:`appendix_bounds_report` : pointwise verification of the bounds on F
"""

from __future__ import annotations

import json
import math
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import minimize_scalar

__all__ = [
    "SpecialFunctionTable",
    "HAnalysisResult",
    "f",
    "F",
    "F_inverse",
    "t_tf",
    "t_tf_prime",
    "H",
    "g",
    "dfs2",
    "minimize_H",
    "min_g",
    "appendix_bounds_report",
    "phase_space_report",
    "get_table",
]

TABLE_SCHEMA = "reltfw.special_function_table/1"

# series switch points
_F_SERIES_MAX = 1e-4
_TTF_SERIES_MAX = 0.1
_QUAD_EPSREL = 1e-13


def _as_checked(x, name="t", strict=False):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if strict:
        if np.any(arr <= 0):
            raise ValueError(f"{name} must be positive")
    elif np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def _out(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _f_raw(t):
    t2 = t * t
    return np.sqrt(t / np.sqrt(t2 + 1.0) + 2.0 * t2 / (t2 + 1.0) * np.arcsinh(t))


def f(t):
    """Closed form ``sqrt(t/sqrt(t^2+1) + 2 t^2/(t^2+1) arsinh t)``."""
    arr = _as_checked(t)
    return _out(_f_raw(arr), t)


def _F_series(t):
    # f(t) = sqrt(t) (1 + 3/4 t^2 - 121/96 t^4 + ...)
    return (2.0 / 3.0) * t**1.5 + (3.0 / 14.0) * t**3.5 - (11.0 / 48.0) * t**5.5


def _F_quad(t):
    """Direct adaptive quadrature of f on [0, t] for a scalar t."""
    if t <= _F_SERIES_MAX:
        return _F_series(t)
    val = _F_series(_F_SERIES_MAX)
    # split at decades so the quadrature sees smooth pieces
    lo = _F_SERIES_MAX
    while lo < t:
        hi = min(t, lo * 10.0)
        piece, _ = quad(_f_raw, lo, hi, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=200)
        val += piece
        lo = hi
    return val


@dataclass(frozen=True)
class SpecialFunctionTable:
    """Cached tabulation of F on log-spaced nodes.

    Interpolation is cubic Hermite in ``(log t, log F)`` using the exact
    logarithmic derivative ``t f(t) / F(t) = 1/H(t)``; the inverse uses the
    same nodes with the roles swapped.
    """

    nodes: np.ndarray
    F_values: np.ndarray
    interpolation_order: int = 3
    max_node: float = 1e8
    _fwd: CubicHermiteSpline = field(init=False, repr=False, compare=False)
    _inv: CubicHermiteSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        vals = np.asarray(self.F_values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != vals.shape or len(nodes) < 4:
            raise ValueError("nodes and F_values must be matching 1-d arrays")
        if np.any(np.diff(nodes) <= 0) or np.any(np.diff(vals) <= 0):
            raise ValueError("table must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "F_values", vals)
        x = np.log(nodes)
        y = np.log(vals)
        dydx = nodes * _f_raw(nodes) / vals
        object.__setattr__(self, "_fwd", CubicHermiteSpline(x, y, dydx))
        object.__setattr__(self, "_inv", CubicHermiteSpline(y, x, 1.0 / dydx))

    @classmethod
    def build(cls, n_nodes=4097, min_node=1e-8, max_node=1e8):
        nodes = np.logspace(math.log10(min_node), math.log10(max_node), n_nodes)
        vals = np.empty(n_nodes)
        vals[0] = _F_quad(nodes[0])
        for i in range(1, n_nodes):
            piece, _ = quad(_f_raw, nodes[i - 1], nodes[i], epsabs=0.0, epsrel=_QUAD_EPSREL)
            vals[i] = vals[i - 1] + piece
        return cls(nodes, vals, 3, float(max_node))

    @property
    def min_node(self):
        return float(self.nodes[0])

    def F(self, t):
        """Vectorized F, no domain checks."""
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        lo = t < self.nodes[0]
        hi = t > self.max_node
        mid = ~(lo | hi)
        out[lo] = _F_series(t[lo])
        out[mid] = np.exp(self._fwd(np.log(t[mid])))
        if np.any(hi):
            top = self.F_values[-1]
            out[hi] = [
                top + quad(_f_raw, self.max_node, ti, epsabs=0.0, epsrel=_QUAD_EPSREL)[0]
                for ti in t[hi]
            ]
        return out

    def F_inverse(self, y):
        """Vectorized inverse of F, no domain checks."""
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        y_lo, y_hi = self.F_values[0], self.F_values[-1]
        lo = y < y_lo
        hi = y > y_hi
        mid = ~(lo | hi)
        out[mid] = np.exp(self._inv(np.log(y[mid])))
        if np.any(lo):
            # invert the leading series term, then two Newton steps
            yl = y[lo]
            t = (1.5 * yl) ** (2.0 / 3.0)
            for _ in range(2):
                ft = np.sqrt(t) * (1.0 + 0.75 * t * t)
                t = np.where(t > 0, t - (_F_series(t) - yl) / np.where(ft > 0, ft, 1.0), 0.0)
            out[lo] = t
        if np.any(hi):
            out[hi] = [_F_inverse_bracketed(yi, self) for yi in y[hi]]
        return out

    def to_dict(self):
        return {
            "schema": TABLE_SCHEMA,
            "interpolation_order": self.interpolation_order,
            "max_node": self.max_node,
            "nodes": self.nodes.tolist(),
            "F_values": self.F_values.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != TABLE_SCHEMA:
            raise ValueError(f"unsupported table schema {data.get('schema')!r}")
        return cls(
            np.array(data["nodes"]),
            np.array(data["F_values"]),
            int(data["interpolation_order"]),
            float(data["max_node"]),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


_TABLE = None
_TABLE_LOCK = threading.Lock()


def cache_dir():
    """Directory for persisted tables, from ``RELTFW_CACHE_DIR`` (None if unset)."""
    d = os.environ.get("RELTFW_CACHE_DIR")
    return Path(d) if d else None


def get_table():
    """Return the process-wide table, building (or loading from cache) once."""
    global _TABLE
    if _TABLE is not None:
        return _TABLE
    with _TABLE_LOCK:
        if _TABLE is None:
            table = None
            d = cache_dir()
            path = d / "F_table.json" if d else None
            if path is not None and path.exists():
                try:
                    table = SpecialFunctionTable.load(path)
                except (ValueError, KeyError, json.JSONDecodeError):
                    table = None
            if table is None:
                table = SpecialFunctionTable.build()
                if path is not None:
                    d.mkdir(parents=True, exist_ok=True)
                    table.save(path)
            _TABLE = table
    return _TABLE


def F(t, exact=False):
    """Antiderivative ``F(t) = int_0^t f(s) ds``.

    With ``exact=True`` every value is computed by adaptive quadrature;
    otherwise the cached table is used (relative error below 1e-10).
    """
    arr = _as_checked(t)
    if exact:
        vals = np.vectorize(_F_quad, otypes=[float])(arr)
    else:
        vals = get_table().F(arr)
    return _out(vals, t)


def _F_inverse_bracketed(y, table=None, tol=1e-13):
    """Bracketed Newton for F(t) = y, bisection fallback.

    The bracket is ``[0, 2 y^{2/3} (y+1)^{1/3}]``; the upper end is the
    inverse-G bound that follows from ``F(t) >= G(t)``.
    """
    if y == 0.0:
        return 0.0
    Fe = table.F if table is not None else np.vectorize(_F_quad, otypes=[float])
    hi = 2.0 * y ** (2.0 / 3.0) * (y + 1.0) ** (1.0 / 3.0)
    lo = 0.0
    t = 0.5 * hi
    for _ in range(100):
        val = float(Fe(np.array([t]))[0]) - y
        if abs(val) <= tol * y:
            return t
        if val > 0:
            hi = t
        else:
            lo = t
        step = t - val / float(_f_raw(t))
        t = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-16 * hi:
            return t
    return t


def F_inverse(y, exact=False):
    """Inverse of F on the nonnegative reals."""
    arr = _as_checked(y, "y")
    if exact:
        vals = np.vectorize(lambda v: _F_inverse_bracketed(v, None), otypes=[float])(arr)
    else:
        vals = get_table().F_inverse(arr)
    return _out(vals, y)


def _t_tf_series(s):
    # t'(s) = 8 s^2 (sqrt(1+s^2) - 1) = 8 sum_k binom(1/2, k) s^(2k+2)
    s2 = s * s
    total = np.zeros_like(s)
    coef = 1.0
    power = s**5
    for k in range(1, 14):
        coef *= (0.5 - (k - 1)) / k
        total = total + coef * power / (2 * k + 3)
        power = power * s2
    return 8.0 * total


def _t_tf_raw(s):
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s < _TTF_SERIES_MAX
    out[small] = _t_tf_series(s[small])
    b = s[~small]
    c = np.sqrt(b * b + 1.0)
    out[~small] = b * c * (1.0 + 2.0 * b * b) - np.arcsinh(b) - (8.0 / 3.0) * b**3
    return out


def t_tf(s):
    """Relativistic Thomas-Fermi kinetic energy density (rest mass removed).

    ``s (s^2+1)^{3/2} + s^3 (s^2+1)^{1/2} - arsinh s - 8/3 s^3``; a binomial
    series replaces the closed form below s = 0.1 where it cancels.
    """
    arr = _as_checked(s, "s")
    return _out(_t_tf_raw(arr), s)


def t_tf_prime(s):
    """Derivative ``8 s^2 (sqrt(s^2+1) - 1)`` in cancellation-free form."""
    arr = _as_checked(s, "s")
    s2 = arr * arr
    return _out(8.0 * s2 * s2 / (np.sqrt(s2 + 1.0) + 1.0), s)


def H(s, exact=False):
    """``F(s) / (s F'(s))`` for s > 0."""
    arr = _as_checked(s, "s", strict=True)
    Fv = np.asarray(F(arr, exact=exact))
    return _out(Fv / (arr * _f_raw(arr)), s)


def dfs2(s):
    """Closed form of ``d/ds (F'(s)/s^2)``, negative for all s > 0."""
    p = _as_checked(s, "s", strict=True)
    c = np.sqrt(p * p + 1.0)
    ash = np.arcsinh(p)
    num = (2.0 * p * p + 3.0) * c + 4.0 * (2.0 * p * p + 1.0) * p * ash
    den = 2.0 * p**2.5 * c**3 * np.sqrt(c + 2.0 * p * ash)
    return _out(-num / den, s)


def g(s):
    """``-(F'/s^2)' F' / (F'^2/s^2)^2``; tends to 3/2 at 0 and diverges at infinity."""
    p = _as_checked(s, "s", strict=True)
    fp = _f_raw(p)
    # (f^2/s^2)^2 = f^4 / s^4, arranged to avoid overflow at large s
    ratio = fp * fp / p
    return _out(-np.asarray(dfs2(p)) * fp * p * p / (ratio * ratio), s)


@dataclass(frozen=True)
class HAnalysisResult:
    s_star: float
    a: float
    b: float
    scan_sup: float


def minimize_H(scan_points=2001, s_lo=1e-8, s_hi=1e8):
    """Locate ``a = inf H`` and ``b = sup H`` over the positive reals.

    A coarse log-scan brackets the minimizer, Brent's method refines it on
    the direct-quadrature H. ``b`` is the larger of the scan supremum and the
    limit ``H(s) -> 1`` as s grows.
    """
    u = np.linspace(math.log(s_lo), math.log(s_hi), scan_points)
    hv = np.asarray(H(np.exp(u)))
    k = int(np.argmin(hv))
    k = min(max(k, 1), len(u) - 2)

    def obj(x):
        return float(H(math.exp(x), exact=True))

    res = minimize_scalar(obj, bracket=(u[k - 1], u[k], u[k + 1]), method="brent",
                          options={"xtol": 1e-12})
    scan_sup = float(hv.max())
    return HAnalysisResult(float(math.exp(res.x)), float(res.fun), max(scan_sup, 1.0), scan_sup)


def min_g(scan_points=4001, s_lo=1e-6, s_hi=1e6):
    """Return ``(s_min, c_g)`` with ``c_g = min g`` by log-scan plus Brent."""
    u = np.linspace(math.log(s_lo), math.log(s_hi), scan_points)
    gv = np.asarray(g(np.exp(u)))
    k = int(np.argmin(gv))
    if k == 0:
        # g decreases toward 0+; the infimum is the limit 3/2 approached there
        return float(s_lo), float(gv[0])
    k = min(k, len(u) - 2)
    res = minimize_scalar(lambda x: float(g(math.exp(x))),
                          bracket=(u[k - 1], u[k], u[k + 1]), method="brent",
                          options={"xtol": 1e-12})
    return float(math.exp(res.x)), float(res.fun)


def _sqrt_asinh_gap(s):
    """Stable ``s sqrt(1+s^2) - arsinh s`` (= int_0^s 2q^2/sqrt(1+q^2) dq)."""
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s < 1e-2
    a = s[small]
    out[small] = (2 / 3) * a**3 - (1 / 5) * a**5 + (3 / 28) * a**7 - (5 / 72) * a**9
    b = s[~small]
    out[~small] = b * np.sqrt(1 + b * b) - np.arcsinh(b)
    return out


def _G(s):
    return s**1.5 / (2.0 * np.sqrt(1.0 + s))


def _G_inv_upper(y):
    return 2.0 * y ** (2.0 / 3.0) * np.cbrt(y + 1.0)


def appendix_bounds_report(sample):
    """Pointwise check of the bounds on F, f, t^TF and G at every sample point.

    Returns a dict mapping each check name to ``{"failures": int,
    "checked": int, "min_margin": float}`` plus ``"all_passed"``.
    Margins are relative: ``(lhs - rhs) / |rhs|``.
    """
    s = _as_checked(sample, "sample", strict=True).ravel()
    s = np.unique(s)
    ash = np.arcsinh(s)
    Fv = np.asarray(F(s))
    fv = _f_raw(s)
    tv = _t_tf_raw(s)
    Ft = s * np.sqrt(ash) / 2.0
    Gs = _G(s)

    # f^2 - arsinh = (s sqrt(1+s^2) - arsinh s + s^2 arsinh s) / (1+s^2)
    a2_margin = (_sqrt_asinh_gap(s) + s * s * ash) / ((1 + s * s) * ash)
    ttilde = s**4 / (1.0 + 1.0 / (0.8 * s))

    yv = s  # sample reused as F-values for the inverse bound
    Finv = np.asarray(F_inverse(yv))
    Ginv_up = _G_inv_upper(yv)

    sq = np.sqrt(ash)
    d1 = 1.0 / (2.0 * np.sqrt((s * s + 1.0) * ash))
    d2 = -s / (2.0 * np.sqrt((s * s + 1.0) ** 3 * ash)) - 1.0 / (4.0 * (s * s + 1.0) * ash**1.5)
    # arithmetic midpoints for the discrete concavity check
    amid = 0.5 * (s[:-1] + s[1:])
    conc = np.sqrt(np.arcsinh(amid)) - 0.5 * (sq[:-1] + sq[1:])

    checks = {
        "a1_F_gt_Ftilde": (Fv - Ft) / Ft,
        "a2_f_gt_sqrt_arsinh": a2_margin,
        "a3_tTF_gt_ttilde": (tv - ttilde) / ttilde,
        "G_Ftilde_gt_G": (Ft - Gs) / Gs,
        "Ginverse_upper": (Ginv_up - Finv) / Ginv_up,
        "Ginverse_G_of_bound": (_G(Ginv_up) - yv) / yv,
        "sqrt_arsinh_increasing": np.concatenate([d1, np.diff(sq) / sq[1:]]),
        "sqrt_arsinh_concave": np.concatenate([-d2, conc / sq[1:]]),
    }
    report = {}
    ok = True
    for name, margin in checks.items():
        fails = int(np.count_nonzero(~(margin > 0)))
        ok &= fails == 0
        report[name] = {
            "failures": fails,
            "checked": int(margin.size),
            "min_margin": float(np.min(margin)) if margin.size else float("nan"),
        }
    report["all_passed"] = bool(ok)
    return report


def phase_space_report(sample, ulps=8):
    """Check ``2p^4 >= t^TF(p) >= 2p^4 - 8/3 p^3`` pointwise.

    Both gaps shrink below double resolution of ``2p^4`` near p ~ 1e8, so
    each comparison allows ``ulps`` units of roundoff in ``2p^4``.
    """
    p = _as_checked(sample, "sample").ravel()
    tv = _t_tf_raw(p)
    upper = 2.0 * p**4
    lower = upper - (8.0 / 3.0) * p**3
    slack = ulps * np.finfo(float).eps * upper
    up_fail = int(np.count_nonzero(tv > upper + slack))
    lo_fail = int(np.count_nonzero(tv < lower - slack))
    return {
        "upper_failures": up_fail,
        "lower_failures": lo_fail,
        "checked": int(p.size),
        "all_passed": up_fail == 0 and lo_fail == 0,
    }
