"""Conformally invariant extension operators on the unit ball: special
functions, quadrature, spectral and brute-force operator routes, sharp
constants, stability functionals and a verification harness."""

__version__ = "0.1.0"
