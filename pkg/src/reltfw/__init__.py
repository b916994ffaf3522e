"""Relativistic Thomas-Fermi-Weizsacker functional: special functions,
constrained radial minimization and the excess-charge analysis."""

__version__ = "0.1.0"
