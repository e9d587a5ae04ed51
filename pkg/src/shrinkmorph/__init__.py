"""Kirigami / shrink-film composite morphing toolkit.

Pipeline: 2D pattern layouts -> conforming triangulation -> stacked wedge
meshes -> geometrically nonlinear equilibrium under thermal contraction
eigenstrain -> shape metrics and parametric sweeps.
"""

__version__ = "0.1.0"

from .errors import ShrinkMorphError  # noqa: F401
