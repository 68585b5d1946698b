"""Pseudospectral solvers and energy diagnostics for fully dispersive Boussinesq systems."""

__version__ = "0.1.0"
