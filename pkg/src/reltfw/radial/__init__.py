"""Spherically symmetric atomic solver on a logarithmic radial grid."""

from .functional import (
    EnergyBreakdown,
    Functional,
    energy_gradient,
    evaluate_energy,
    hartree_energy,
    hartree_potential,
    particle_number,
)
from .grid import RadialGrid, default_grid
from .minimize import (
    IonizationScan,
    MinimizeResult,
    SolverOptions,
    euler_residual,
    find_max_ionization,
    minimize,
    scan_max_ionization,
)

__all__ = [
    "EnergyBreakdown",
    "Functional",
    "IonizationScan",
    "MinimizeResult",
    "RadialGrid",
    "SolverOptions",
    "default_grid",
    "energy_gradient",
    "euler_residual",
    "evaluate_energy",
    "find_max_ionization",
    "hartree_energy",
    "hartree_potential",
    "minimize",
    "particle_number",
    "scan_max_ionization",
]
