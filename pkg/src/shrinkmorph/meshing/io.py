"""Mesh exchange: legacy ASCII VTK, binary STL, and a 2D mesh text format.

The 2D format (imports welcome from external meshers):

    # comment lines start with '#'
    LAYERS substrate kirigami      bit order of the coverage masks
    NODES <n>                      then n lines: x y   (mm)
    TRIANGLES <m>                  then m lines: v0 v1 v2 coverage_int
    CONSTRAINED_EDGES <k>          then k lines: a b
    MESH <h_target> <min_angle>    optional trailing metadata

STL output is binary little-endian, units mm, one closed surface per layer
prism (top + bottom faces plus side walls along the layer's coverage
boundary), suitable for printing the kirigami piece directly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import PolygonFormatError
from .extrude import LayeredMesh
from .triangulate import TriMesh2D

VTK_WEDGE = 13


def write_vtk(
    mesh: LayeredMesh,
    path,
    point_vectors: dict[str, np.ndarray] | None = None,
    cell_scalars: dict[str, np.ndarray] | None = None,
    coordinates: np.ndarray | None = None,
) -> None:
    """Legacy ASCII unstructured grid of the wedge mesh.

    ``coordinates`` overrides node positions (deformed snapshots);
    ``point_vectors`` adds 3-vector POINT_DATA, ``cell_scalars`` CELL_DATA.
    """
    xyz = mesh.nodes if coordinates is None else np.asarray(coordinates)
    elems = mesh.elements
    lines = [
        "# vtk DataFile Version 3.0",
        "shrinkmorph layered wedge mesh",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(xyz)} double",
    ]
    lines.extend(f"{p[0]:.12g} {p[1]:.12g} {p[2]:.12g}" for p in xyz)
    lines.append(f"CELLS {len(elems)} {len(elems) * 7}")
    # VTK wedge wants the base triangle wound so its right-hand normal
    # points away from the top face
    for e in elems:
        lines.append(f"6 {e[0]} {e[2]} {e[1]} {e[3]} {e[5]} {e[4]}")
    lines.append(f"CELL_TYPES {len(elems)}")
    lines.extend([str(VTK_WEDGE)] * len(elems))

    scalars = {"layer_id": mesh.element_layer.astype(float)}
    if cell_scalars:
        scalars.update(cell_scalars)
    lines.append(f"CELL_DATA {len(elems)}")
    for name, values in scalars.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(f"{v:.9g}" for v in np.asarray(values, dtype=float))

    if point_vectors:
        lines.append(f"POINT_DATA {len(xyz)}")
        for name, values in point_vectors.items():
            arr = np.asarray(values, dtype=float).reshape(-1, 3)
            lines.append(f"VECTORS {name} double")
            lines.extend(f"{v[0]:.9g} {v[1]:.9g} {v[2]:.9g}" for v in arr)

    Path(path).write_text("\n".join(lines) + "\n")


def layer_surface_triangles(mesh: LayeredMesh, layer_name: str) -> np.ndarray:
    """Closed triangle soup (n, 3, 3) of one layer's prism surface.

    Bottom and top faces come from the covered 2D triangles at the layer's
    z-levels; side walls from the coverage region's boundary edges. All
    facets wind outward.
    """
    li = mesh.layer_index(layer_name)
    lo, hi = mesh.layer_levels[li]
    mesh2d = mesh.mesh2d
    covered = np.nonzero(mesh2d.covered(layer_name))[0]
    if covered.size == 0:
        raise PolygonFormatError(f"layer {layer_name!r} covers no triangles")

    z_lo = _level_z(mesh, lo)
    z_hi = _level_z(mesh, hi)
    xy = mesh2d.nodes
    tris2d = mesh2d.triangles[covered]

    def lift(tri, z):
        return np.column_stack([xy[tri, 0], xy[tri, 1], np.full(3, z)])

    facets = []
    for tri in tris2d:
        facets.append(lift(tri, z_lo)[[0, 2, 1]])  # outward = -z
        facets.append(lift(tri, z_hi))  # outward = +z

    # boundary of the covered set: directed edges appearing exactly once
    edges = np.vstack([tris2d[:, [0, 1]], tris2d[:, [1, 2]], tris2d[:, [2, 0]]])
    keys = np.sort(edges, axis=1)
    _, inverse, counts = np.unique(
        keys, axis=0, return_inverse=True, return_counts=True
    )
    boundary = edges[counts[inverse] == 1]
    for a, b in boundary:
        pa_lo = np.array([xy[a, 0], xy[a, 1], z_lo])
        pb_lo = np.array([xy[b, 0], xy[b, 1], z_lo])
        pa_hi = np.array([xy[a, 0], xy[a, 1], z_hi])
        pb_hi = np.array([xy[b, 0], xy[b, 1], z_hi])
        # interior is left of a->b, so the outward wall normal is rightward
        facets.append(np.stack([pa_lo, pb_lo, pb_hi]))
        facets.append(np.stack([pa_lo, pb_hi, pa_hi]))
    return np.stack(facets)


def _level_z(mesh: LayeredMesh, level: int) -> float:
    at = np.nonzero(mesh.node_level == level)[0]
    return float(mesh.nodes[at[0], 2])


def write_stl_layer(mesh: LayeredMesh, layer_name: str, path) -> None:
    """Binary STL (mm) of one layer's closed prism surface."""
    facets = layer_surface_triangles(mesh, layer_name)
    write_stl(facets, path, comment=f"shrinkmorph layer {layer_name}")


def write_stl(facets: np.ndarray, path, comment: str = "shrinkmorph") -> None:
    facets = np.asarray(facets, dtype=float)
    n = len(facets)
    normals = np.cross(
        facets[:, 1] - facets[:, 0], facets[:, 2] - facets[:, 0]
    )
    lengths = np.linalg.norm(normals, axis=1)
    lengths[lengths == 0] = 1.0
    normals = normals / lengths[:, None]
    with open(path, "wb") as f:
        header = comment.encode()[:80].ljust(80, b"\0")
        f.write(header)
        f.write(struct.pack("<I", n))
        for nrm, tri in zip(normals, facets):
            f.write(struct.pack("<3f", *nrm))
            for v in tri:
                f.write(struct.pack("<3f", *v))
            f.write(struct.pack("<H", 0))


def stl_manifold_defects(facets: np.ndarray) -> int:
    """Count of edge pairings violating closed-manifold winding.

    Zero means watertight: every edge appears exactly twice, once per
    direction. Vertices are matched on a 1e-9 grid.
    """
    facets = np.asarray(facets)

    def key(v):
        return (round(v[0] * 1e9), round(v[1] * 1e9), round(v[2] * 1e9))

    counts: dict[tuple, int] = {}
    for tri in facets:
        ks = [key(tri[0]), key(tri[1]), key(tri[2])]
        for i in range(3):
            a, b = ks[i], ks[(i + 1) % 3]
            counts[(a, b)] = counts.get((a, b), 0) + 1
    defects = 0
    for (a, b), c in counts.items():
        if c != 1 or counts.get((b, a), 0) != 1:
            defects += 1
    return defects


def read_stl_binary(path):
    """(normals, facets) from a binary STL; for round-trip checks."""
    raw = Path(path).read_bytes()
    n = struct.unpack_from("<I", raw, 80)[0]
    normals = np.zeros((n, 3))
    facets = np.zeros((n, 3, 3))
    off = 84
    for i in range(n):
        vals = struct.unpack_from("<12fH", raw, off)
        normals[i] = vals[0:3]
        facets[i] = np.array(vals[3:12]).reshape(3, 3)
        off += 50
    return normals, facets


# ---------------------------------------------------------------------------
# 2D mesh text format


def export_trimesh(mesh: TriMesh2D, path) -> None:
    lines = ["# shrinkmorph 2D mesh, coordinates in mm"]
    lines.append("LAYERS " + " ".join(mesh.layer_names))
    lines.append(f"NODES {len(mesh.nodes)}")
    lines.extend(f"{x:.12g} {y:.12g}" for x, y in mesh.nodes)
    lines.append(f"TRIANGLES {len(mesh.triangles)}")
    lines.extend(
        f"{t[0]} {t[1]} {t[2]} {int(c)}"
        for t, c in zip(mesh.triangles, mesh.coverage)
    )
    lines.append(f"CONSTRAINED_EDGES {len(mesh.boundary_edges)}")
    lines.extend(f"{a} {b}" for a, b in mesh.boundary_edges)
    lines.append(f"MESH {mesh.h_target:.12g} {mesh.min_angle:.12g}")
    Path(path).write_text("\n".join(lines) + "\n")


def import_trimesh(path) -> TriMesh2D:
    """Parse the 2D mesh format; validates counts and index ranges."""
    tokens: list[list[str]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise PolygonFormatError(f"{path}: unexpected end of file")
        row = tokens[pos]
        pos += 1
        return row

    row = take()
    if row[0].upper() != "LAYERS" or len(row) < 2:
        raise PolygonFormatError(f"{path}: expected 'LAYERS <names...>'")
    layer_names = row[1:]

    row = take()
    if row[0].upper() != "NODES":
        raise PolygonFormatError(f"{path}: expected 'NODES <count>'")
    n = int(row[1])
    nodes = np.array([[float(v) for v in take()[:2]] for _ in range(n)])

    row = take()
    if row[0].upper() != "TRIANGLES":
        raise PolygonFormatError(f"{path}: expected 'TRIANGLES <count>'")
    m = int(row[1])
    tris = np.zeros((m, 3), dtype=int)
    coverage = np.zeros(m, dtype=np.uint32)
    for i in range(m):
        row = take()
        tris[i] = [int(v) for v in row[:3]]
        coverage[i] = int(row[3]) if len(row) > 3 else (1 << len(layer_names)) - 1
    if tris.size and (tris.min() < 0 or tris.max() >= n):
        raise PolygonFormatError(f"{path}: triangle node index out of range")

    bedges = np.zeros((0, 2), dtype=int)
    h_target, min_angle = 1.0, 20.0
    while pos < len(tokens):
        row = take()
        head = row[0].upper()
        if head == "CONSTRAINED_EDGES":
            k = int(row[1])
            bedges = np.array(
                [[int(v) for v in take()[:2]] for _ in range(k)], dtype=int
            ).reshape(k, 2)
        elif head == "MESH":
            h_target = float(row[1])
            min_angle = float(row[2]) if len(row) > 2 else 20.0
        else:
            raise PolygonFormatError(f"{path}: unknown section {row[0]!r}")

    mesh = TriMesh2D(
        nodes=nodes,
        triangles=tris,
        coverage=coverage,
        layer_names=list(layer_names),
        boundary_edges=bedges,
        h_target=h_target,
        min_angle=min_angle,
    )
    areas = mesh.triangle_areas()
    if np.any(areas <= 0):
        raise PolygonFormatError(f"{path}: non-positive triangle areas")
    return mesh
