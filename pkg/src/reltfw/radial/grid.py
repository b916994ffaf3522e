"""Logarithmic radial mesh with piecewise-linear (P1) quadrature weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# default extent in Bohr radii; a Bohr radius is 1/alpha_s Compton wavelengths
DEFAULT_R_MIN_BOHR = 1e-5
DEFAULT_R_MAX_BOHR = 60.0
DEFAULT_N = 2000


@dataclass(frozen=True)
class RadialGrid:
    """Log-spaced nodes ``r`` with weights ``w`` for ``int 4 pi r^2 dr``.

    The weights integrate the P1 interpolant exactly, with the ball
    ``[0, r_min]`` attached to the first node (field held constant there).
    ``stiffness[i]`` is the exact ``4 pi int r^2 dr / dr^2`` of interval i,
    so ``sum stiffness * diff(chi)**2 = int |grad chi|^2`` for P1 fields.
    """

    r: np.ndarray
    w: np.ndarray = field(repr=False)
    stiffness: np.ndarray = field(repr=False)

    @classmethod
    def log(cls, n, r_min, r_max):
        if n < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not (0 < r_min < r_max) or not math.isfinite(r_max):
            raise ValueError("need 0 < r_min < r_max")
        r = np.geomspace(r_min, r_max, n)
        return cls.from_nodes(r)

    @classmethod
    def from_nodes(cls, r):
        r = np.asarray(r, dtype=float)
        if np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("nodes must be positive and strictly increasing")
        a, b = r[:-1], r[1:]
        d = b - a
        rising = d * (3 * b * b + 2 * a * b + a * a) / 12.0
        falling = d * (b * b + 2 * a * b + 3 * a * a) / 12.0
        w = np.zeros_like(r)
        w[1:] += rising
        w[:-1] += falling
        w *= 4.0 * math.pi
        w[0] += 4.0 / 3.0 * math.pi * r[0] ** 3
        stiff = 4.0 * math.pi * (b * b + a * b + a * a) / (3.0 * d)
        return cls(r, w, stiff)

    @property
    def n(self):
        return len(self.r)

    @property
    def r_min(self):
        return float(self.r[0])

    @property
    def r_max(self):
        return float(self.r[-1])

    def integrate(self, values):
        """``int 4 pi r^2 values dr`` over ``[0, r_max]``."""
        return float(np.dot(self.w, values))

    def stiffness_apply(self, chi):
        """Nodal derivative of ``int |grad chi|^2`` with respect to chi."""
        d = np.diff(chi) * self.stiffness
        out = np.zeros_like(chi)
        out[:-1] -= 2.0 * d
        out[1:] += 2.0 * d
        return out


def default_grid(alpha_s, n=DEFAULT_N, r_min=None, r_max=None):
    """Grid spanning ``[1e-5, 60]`` Bohr radii, converted to Compton units."""
    bohr = 1.0 / alpha_s
    return RadialGrid.log(
        n,
        DEFAULT_R_MIN_BOHR * bohr if r_min is None else r_min,
        DEFAULT_R_MAX_BOHR * bohr if r_max is None else r_max,
    )
