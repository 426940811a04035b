"""Numerical laboratory for Laguerre ensembles with a pole perturbation."""

__version__ = "0.1.0"
