"""Physical parameters shared by the solver and the bound computations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ALPHA_PHYSICAL = 1.0 / 137.035999084


@dataclass(frozen=True)
class PhysicalParams:
    """Coupling constants, nuclear data and the particle-number bound.

    Lengths are in reduced Compton wavelengths (so one Bohr radius is
    ``1/alpha_s``) and energies in units of ``mc^2``.
    """

    lam: float = 1.0
    alpha_s: float = ALPHA_PHYSICAL
    Z_list: tuple = (1.0,)
    R_list: tuple = field(default=None)
    N: float = 1.0

    def __post_init__(self):
        Z = tuple(float(z) for z in self.Z_list)
        if self.R_list is None:
            if len(Z) > 1:
                raise ValueError("R_list is required when more than one nucleus is given")
            R = tuple((0.0, 0.0, 0.0) for _ in Z)
        else:
            R = tuple(tuple(float(c) for c in x) for x in self.R_list)
        object.__setattr__(self, "Z_list", Z)
        object.__setattr__(self, "R_list", R)
        self.validate()

    def validate(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lambda must be positive")
        if not (math.isfinite(self.alpha_s) and self.alpha_s > 0):
            raise ValueError("alpha_s must be positive")
        if any(not math.isfinite(z) or z < 0 for z in self.Z_list):
            raise ValueError("nuclear charges must be nonnegative")
        if not (math.isfinite(self.N) and self.N >= 0):
            raise ValueError("N must be nonnegative")
        if len(self.R_list) != len(self.Z_list):
            raise ValueError("Z_list and R_list differ in length")
        if any(len(x) != 3 for x in self.R_list):
            raise ValueError("nuclear positions must be 3-vectors")
        pts = np.array(self.R_list, dtype=float).reshape(-1, 3)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(pts[i] - pts[j]) == 0.0:
                    raise ValueError("nuclear positions must be pairwise distinct")

    @property
    def K(self):
        return len(self.Z_list)

    @property
    def Z(self):
        return float(sum(self.Z_list))

    def nuclear_repulsion(self):
        """``sum_{k<l} alpha_s Z_k Z_l / |R_k - R_l|``."""
        pts = np.array(self.R_list, dtype=float).reshape(-1, 3)
        total = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                total += self.Z_list[i] * self.Z_list[j] / np.linalg.norm(pts[i] - pts[j])
        return self.alpha_s * total

    def require_atomic(self):
        if self.K != 1 or any(c != 0.0 for c in self.R_list[0]):
            raise ValueError("the radial solver handles a single nucleus at the origin")

    def to_dict(self):
        return {
            "lambda": self.lam,
            "alpha_s": self.alpha_s,
            "Z_list": list(self.Z_list),
            "R_list": [list(x) for x in self.R_list],
            "N": self.N,
        }
