"""Charge-2 SU(2) monopole fields from theta functions.

Evaluates the gauge-invariant Higgs norm H^2 = -(1/2) Tr Phi^2 and the
energy density of the charge-2 BPS monopole anywhere in R^3, for a
separation modulus k in (0, 1), and exports volumetric grids, isosurface
meshes, and tomogram slices.
"""

from .specfun import Modulus, make_modulus

__version__ = "0.1.0"
