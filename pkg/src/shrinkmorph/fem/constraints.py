"""Boundary conditions: experiment-matching and free-floating supports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MeshingError
from ..meshing import LayeredMesh

_DOF = {"x": 0, "y": 1, "z": 2}


@dataclass
class ConstraintSet:
    """Per-dof prescription list: (node, dof in {x,y,z}, value in mm)."""

    entries: list[tuple[int, str, float]]

    def __post_init__(self):
        seen = set()
        for node, dof, _ in self.entries:
            if dof not in _DOF:
                raise MeshingError(f"unknown dof {dof!r}")
            key = (node, dof)
            if key in seen:
                raise MeshingError(f"duplicate constraint on node {node} dof {dof}")
            seen.add(key)

    def fixed_indices(self) -> np.ndarray:
        return np.array(
            sorted(3 * node + _DOF[dof] for node, dof, _ in self.entries), dtype=int
        )

    def apply(self, u: np.ndarray) -> None:
        for node, dof, value in self.entries:
            u[3 * node + _DOF[dof]] = value

    def __len__(self):
        return len(self.entries)


def _anchor_entries(mesh: LayeredMesh, pool: np.ndarray) -> list[tuple[int, str, float]]:
    """Statically determinate in-plane anchor over a candidate node pool.

    Node A is pinned in x and y; the node farthest from A is pinned in the
    in-plane direction most transverse to the line joining them, which
    removes the remaining rotation about z without overconstraint.
    """
    if pool.size < 2:
        raise MeshingError("need at least 2 boundary nodes for the in-plane anchor")
    xy = mesh.nodes[pool][:, :2]
    a_local = np.lexsort((xy[:, 1], xy[:, 0]))[0]
    a = int(pool[a_local])
    d = xy - xy[a_local]
    b_local = int(np.argmax(np.einsum("ij,ij->i", d, d)))
    b = int(pool[b_local])
    if b == a:
        raise MeshingError("anchor nodes coincide; degenerate boundary")
    span = d[b_local]
    perp = "y" if abs(span[0]) >= abs(span[1]) else "x"
    return [(a, "x", 0.0), (a, "y", 0.0), (b, perp, 0.0)]


def build_constraints(mesh: LayeredMesh, substrate_layer: int = 0) -> ConstraintSet:
    """Experiment BC: out-of-plane displacement of the shrink layer's
    footprint-boundary nodes is fixed, plus the in-plane anchor."""
    boundary_cols = set(int(c) for c in mesh.mesh2d.boundary_nodes())
    lo, hi = mesh.layer_levels[substrate_layer]
    layer_nodes = mesh.nodes_of_layer(substrate_layer)
    mask = np.array(
        [
            int(mesh.node_column[n]) in boundary_cols
            and lo <= int(mesh.node_level[n]) <= hi
            for n in layer_nodes
        ]
    )
    pinned = layer_nodes[mask]
    if pinned.size < 2:
        raise MeshingError("substrate layer has fewer than 2 boundary nodes")
    entries = [(int(n), "z", 0.0) for n in pinned]
    entries.extend(_anchor_entries(mesh, pinned))
    return ConstraintSet(entries)


def build_free_constraints(mesh: LayeredMesh) -> ConstraintSet:
    """Rigid-body-only support (3-2-1) for free thermal deformation.

    Node A is fully pinned, the farthest node B gets z plus the transverse
    in-plane dof, and the node farthest from line AB gets z.
    """
    xyz = mesh.nodes
    if len(xyz) < 3:
        raise MeshingError("mesh too small for a 3-2-1 support")
    a = int(np.lexsort((xyz[:, 2], xyz[:, 1], xyz[:, 0]))[0])
    d = xyz[:, :2] - xyz[a, :2]
    b = int(np.argmax(np.einsum("ij,ij->i", d, d)))
    span = d[b]
    span_len = float(np.hypot(*span))
    if span_len <= 0:
        raise MeshingError("all nodes coincide in plan view")
    cross = np.abs(d[:, 0] * span[1] - d[:, 1] * span[0]) / span_len
    c = int(np.argmax(cross))
    if cross[c] <= 1e-12:
        raise MeshingError("mesh is collinear in plan view; 3-2-1 support fails")
    perp = "y" if abs(span[0]) >= abs(span[1]) else "x"
    entries = [
        (a, "x", 0.0),
        (a, "y", 0.0),
        (a, "z", 0.0),
        (b, perp, 0.0),
        (b, "z", 0.0),
        (c, "z", 0.0),
    ]
    return ConstraintSet(entries)
