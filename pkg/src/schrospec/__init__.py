"""Spectral toolkit for the linear Schroedinger equation u_t = -i(-Delta)^m u.

Modules: polyalg (exact generalized Hermite polynomials), kernel (the
rescaled fundamental solution and its derivatives), evolution (FFT
propagation and eigen-expansions), asymptotics (decay and blow-up
classification), regularity (characteristic-vertex tools), nonlin
(quasilinear self-similar pairs), seqspace (coefficient sequence spaces),
acceptance and cli.
"""

from .grids import CGrid
from .polyalg import Poly, SpectralParams, hermite_plus, hermite_star, verify_eigenpair

__version__ = "0.1.0"

__all__ = ["CGrid", "Poly", "SpectralParams", "hermite_plus", "hermite_star", "verify_eigenpair", "__version__"]
