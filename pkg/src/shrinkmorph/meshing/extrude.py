"""Stacking a 2D triangulation into layered 6-node wedge elements."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import MeshingError
from .triangulate import TriMesh2D


@dataclass(frozen=True)
class LayerStackEntry:
    name: str
    thickness: float  # mm
    material: str  # material id resolved by the caller
    subdivisions: int = 1  # elements through this layer's thickness

    def __post_init__(self):
        if self.thickness <= 0:
            raise MeshingError(f"layer {self.name!r}: thickness must be > 0")
        if self.subdivisions < 1:
            raise MeshingError(f"layer {self.name!r}: subdivisions must be >= 1")


@dataclass
class LayeredMesh:
    """Stacked wedge mesh; adjacent layers share interface nodes exactly.

    A 3D node exists for a (2D node, z-level) pair only where some element
    needs it; ``node_column`` and ``node_level`` record that pair, which is
    what boundary-condition building and height metrics key off.
    """

    nodes: np.ndarray  # (N, 3)
    elements: np.ndarray  # (M, 6): bottom triangle then top triangle
    element_layer: np.ndarray  # (M,) index into stack
    stack: list[LayerStackEntry]
    node_column: np.ndarray  # (N,) 2D node index
    node_level: np.ndarray  # (N,) global z-level index
    layer_levels: list[tuple[int, int]]  # per layer: (bottom level, top level)
    mesh2d: TriMesh2D
    element_tri: np.ndarray  # (M,) source 2D triangle index

    @property
    def n_dof(self) -> int:
        return 3 * len(self.nodes)

    def layer_index(self, name: str) -> int:
        for i, entry in enumerate(self.stack):
            if entry.name == name:
                return i
        raise KeyError(f"mesh has no layer named {name!r}")

    def nodes_of_layer(self, index: int) -> np.ndarray:
        """Sorted unique node ids referenced by the layer's elements."""
        return np.unique(self.elements[self.element_layer == index])

    def wedge_volumes(self, coords: np.ndarray | None = None) -> np.ndarray:
        """Exact volumes via 2x3-point Gauss quadrature of det J."""
        x = (coords if coords is not None else self.nodes)[self.elements]
        from ..fem.element import reference_gradients_volume

        _, wdet = reference_gradients_volume(x)
        return wdet.sum(axis=1)


def extrude(mesh2d: TriMesh2D, stack: list[LayerStackEntry]) -> LayeredMesh:
    """Extrude covered triangles of each layer into wedges, bottom-up.

    The first stack entry spans z in [0, t0], each later one sits on top of
    the previous. Interface sharing is by construction: one 3D node per
    (2D node, z-level) pair used by any incident wedge.
    """
    for entry in stack:
        if entry.name not in mesh2d.layer_names:
            raise MeshingError(
                f"stack layer {entry.name!r} not present in mesh coverage "
                f"(known: {mesh2d.layer_names})"
            )

    # global z-levels: layer i occupies levels level_of[i] .. level_of[i+1]
    z_levels = [0.0]
    layer_levels: list[tuple[int, int]] = []
    for entry in stack:
        bottom = len(z_levels) - 1
        for k in range(entry.subdivisions):
            z_levels.append(z_levels[-1] + entry.thickness / entry.subdivisions)
        layer_levels.append((bottom, len(z_levels) - 1))
    z_levels = np.asarray(z_levels)

    node_ids: dict[tuple[int, int], int] = {}
    columns: list[int] = []
    levels: list[int] = []

    def node_at(col: int, lev: int) -> int:
        key = (col, lev)
        idx = node_ids.get(key)
        if idx is None:
            idx = len(columns)
            node_ids[key] = idx
            columns.append(col)
            levels.append(lev)
        return idx

    elements: list[list[int]] = []
    element_layer: list[int] = []
    element_tri: list[int] = []
    for li, entry in enumerate(stack):
        covered = np.nonzero(mesh2d.covered(entry.name))[0]
        lo, hi = layer_levels[li]
        for lev in range(lo, hi):
            for ti in covered:
                tri = mesh2d.triangles[ti]
                bottom = [node_at(int(v), lev) for v in tri]
                top = [node_at(int(v), lev + 1) for v in tri]
                elements.append(bottom + top)
                element_layer.append(li)
                element_tri.append(int(ti))

    if not elements:
        raise MeshingError("no elements created; check layer coverage")

    columns = np.asarray(columns, dtype=int)
    levels = np.asarray(levels, dtype=int)
    nodes = np.column_stack(
        [mesh2d.nodes[columns, 0], mesh2d.nodes[columns, 1], z_levels[levels]]
    )
    return LayeredMesh(
        nodes=nodes,
        elements=np.asarray(elements, dtype=int),
        element_layer=np.asarray(element_layer, dtype=int),
        stack=list(stack),
        node_column=columns,
        node_level=levels,
        layer_levels=layer_levels,
        mesh2d=mesh2d,
        element_tri=np.asarray(element_tri, dtype=int),
    )


@dataclass(frozen=True)
class MeshReport:
    n_elements: int
    n_nodes: int
    min_volume: float
    max_volume: float
    min_triangle_angle: float
    layer_area: dict[str, float]
    layer_volume: dict[str, float]
    warnings: tuple[str, ...]

    def lines(self) -> list[str]:
        out = [
            f"elements: {self.n_elements}",
            f"nodes: {self.n_nodes}",
            f"wedge volume range: [{self.min_volume:.6g}, {self.max_volume:.6g}] mm^3",
            f"min triangle angle: {self.min_triangle_angle:.2f} deg",
        ]
        for name in self.layer_area:
            out.append(
                f"layer {name}: footprint {self.layer_area[name]:.4g} mm^2, "
                f"volume {self.layer_volume[name]:.4g} mm^3"
            )
        for w in self.warnings:
            out.append(f"warning: {w}")
        return out


def mesh_report(mesh: LayeredMesh) -> MeshReport:
    vols = mesh.wedge_volumes()
    areas = mesh.mesh2d.triangle_areas()
    from .triangulate import _tri_quality

    _, _, angles, _, _ = _tri_quality(mesh.mesh2d.nodes, mesh.mesh2d.triangles)
    layer_area = {}
    layer_volume = {}
    for li, entry in enumerate(mesh.stack):
        covered = mesh.mesh2d.covered(entry.name)
        layer_area[entry.name] = float(areas[covered].sum())
        layer_volume[entry.name] = float(vols[mesh.element_layer == li].sum())
    return MeshReport(
        n_elements=len(mesh.elements),
        n_nodes=len(mesh.nodes),
        min_volume=float(vols.min()),
        max_volume=float(vols.max()),
        min_triangle_angle=float(angles.min()),
        layer_area=layer_area,
        layer_volume=layer_volume,
        warnings=tuple(mesh.mesh2d.warnings),
    )
