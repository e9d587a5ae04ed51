"""Triangulation of planar layouts and extrusion into layered wedge meshes."""

from .triangulate import TriMesh2D, triangulate  # noqa: F401
from .extrude import LayeredMesh, LayerStackEntry, extrude, mesh_report  # noqa: F401
