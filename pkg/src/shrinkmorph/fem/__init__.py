"""Geometrically nonlinear equilibrium of layered wedge meshes."""

from .element import ElementState, element_force_tangent  # noqa: F401
from .assembly import FEModel, assemble, strain_energy  # noqa: F401
from .constraints import ConstraintSet, build_constraints, build_free_constraints  # noqa: F401
from .solve import MorphResult, SolveConfig, linear_solve, solve_static  # noqa: F401
