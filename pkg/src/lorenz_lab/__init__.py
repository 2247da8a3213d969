"""Numerical laboratory for the Lorenz equations.

Integration with event location, a piecewise-smooth transverse section and
its symbolic coding, separatrix kneading, homoclinic and heteroclinic
connection searches, periodic orbits and their knot invariants.
"""

from .core import CLASSICAL, Params, eigen_at, fixed_points, symmetry_map, vector_field
from .errors import LorenzLabError

__version__ = "0.1.0"

__all__ = [
    "CLASSICAL",
    "LorenzLabError",
    "Params",
    "eigen_at",
    "fixed_points",
    "symmetry_map",
    "vector_field",
]
