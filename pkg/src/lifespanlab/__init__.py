"""Desk-scale numerical laboratory for finite-time blow-up in two
one-dimensional quasilinear wave equations.

The package solves both equations with shock-capturing finite differences,
estimates lifespans under mesh refinement, checks them against a
characteristics-based closed-form oracle, computes the constants and
functionals of two blow-up arguments (a weighted-functional iteration and a
Gronwall comparison), verifies the resulting inequality chains on solver
output, and reproduces the lifespan scaling T(eps) ~ eps^{-(p-1)}.
"""

__version__ = "0.1.0"
