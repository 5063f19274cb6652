"""Numerical laboratory for Talagrand-type variance and influence inequalities.

Discrete side: biased cubes, finite reversible chains and their products,
Cayley graphs.  Continuous side: product measures on Euclidean space, the
sphere and decompositions of the identity (``talagrand_lab.gauss``,
``talagrand_lab.geom``).
"""
from .kernels import BACKEND
from .report import Estimate, InequalityReport

__version__ = "0.1.0"

__all__ = ["BACKEND", "Estimate", "InequalityReport", "__version__"]
