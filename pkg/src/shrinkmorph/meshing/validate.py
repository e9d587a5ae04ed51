"""Independent mesh audits.

These walk finished meshes from scratch (no reuse of construction
bookkeeping) so they can serve as the second route of a dual check:
conformity by half-edge census, hanging-node detection by geometry,
interface sharing by coordinate matching, and volume positivity by
quadrature.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .extrude import LayeredMesh
from .triangulate import TriMesh2D, _tri_quality


def audit_trimesh(mesh: TriMesh2D, area_min: float = 1e-6) -> list[str]:
    """Conformity and quality audit of a 2D mesh; returns violations."""
    problems: list[str] = []
    nodes, tris = mesh.nodes, mesh.triangles

    if len(np.unique(tris)) != len(nodes):
        problems.append("unused or missing node indices")

    # duplicate nodes
    tree = cKDTree(nodes)
    pairs = tree.query_pairs(1e-12)
    if pairs:
        problems.append(f"{len(pairs)} coincident node pairs")

    # half-edge census: each directed edge at most once; each undirected
    # edge in at most 2 triangles
    directed = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    d_uniq, d_counts = np.unique(directed, axis=0, return_counts=True)
    if np.any(d_counts > 1):
        problems.append("directed edge shared by multiple triangles (orientation)")
    undirected = np.sort(directed, axis=1)
    u_uniq, u_counts = np.unique(undirected, axis=0, return_counts=True)
    if np.any(u_counts > 2):
        problems.append("edge shared by more than 2 triangles")

    # positive areas and orientation
    lengths, area, angles, _, _ = _tri_quality(nodes, tris)
    if np.any(area <= 0):
        problems.append(f"{int(np.sum(area <= 0))} non-CCW or degenerate triangles")
    if np.any(area < area_min):
        problems.append(f"{int(np.sum(area < area_min))} triangles below area_min")

    # hanging nodes: a node lying on an edge interior it does not terminate
    emid = 0.5 * (nodes[u_uniq[:, 0]] + nodes[u_uniq[:, 1]])
    elen = np.linalg.norm(nodes[u_uniq[:, 1]] - nodes[u_uniq[:, 0]], axis=1)
    hits = tree.query_ball_point(emid, elen / 2.0 - 1e-12)
    hanging = 0
    for k, cand in enumerate(hits):
        a, b = u_uniq[k]
        pa, pb = nodes[a], nodes[b]
        d = pb - pa
        ll = elen[k] ** 2
        for n in cand:
            if n == a or n == b:
                continue
            t = np.dot(nodes[n] - pa, d) / ll
            if 1e-9 < t < 1 - 1e-9:
                if np.linalg.norm(pa + t * d - nodes[n]) < 1e-9:
                    hanging += 1
    if hanging:
        problems.append(f"{hanging} hanging nodes on edge interiors")

    # constrained input edges must be present
    edge_set = set(map(tuple, u_uniq))
    missing = [
        (int(a), int(b))
        for a, b in np.sort(mesh.boundary_edges, axis=1)
        if (int(a), int(b)) not in edge_set
    ]
    if missing:
        problems.append(f"{len(missing)} constrained edges missing from the mesh")
    return problems


def audit_layered_mesh(mesh: LayeredMesh) -> list[str]:
    """Extrusion audit: prism verticality, shared interfaces, volumes."""
    problems: list[str] = []
    nodes, elems = mesh.nodes, mesh.elements

    vols = mesh.wedge_volumes()
    if np.any(vols <= 0):
        problems.append(f"{int(np.sum(vols <= 0))} non-positive wedge volumes")

    # bottom and top triangles must be vertical translates
    bot = nodes[elems[:, :3]]
    top = nodes[elems[:, 3:]]
    if not np.allclose(bot[:, :, :2], top[:, :, :2], atol=1e-12):
        problems.append("wedge top triangle is not a vertical translate of bottom")
    dz = top[:, :, 2] - bot[:, :, 2]
    if np.any(dz <= 0):
        problems.append("wedge with non-positive thickness")
    if not np.allclose(dz, dz[:, :1], atol=1e-12):
        problems.append("wedge thickness varies within an element")

    # no duplicated 3D nodes (interface sharing must be by index)
    tree = cKDTree(nodes)
    dup = tree.query_pairs(1e-12)
    if dup:
        problems.append(f"{len(dup)} coincident 3D node pairs (unshared interface)")

    # adjacent layers covering the same triangle share the interface nodes
    for li in range(len(mesh.stack) - 1):
        lo_hi = mesh.layer_levels[li][1]
        lower = {}
        for e in np.nonzero(mesh.element_layer == li)[0]:
            if mesh.node_level[elems[e, 3]] == lo_hi:
                lower[int(mesh.element_tri[e])] = tuple(elems[e, 3:])
        for e in np.nonzero(mesh.element_layer == li + 1)[0]:
            if mesh.node_level[elems[e, 0]] != lo_hi:
                continue
            t = int(mesh.element_tri[e])
            if t in lower and lower[t] != tuple(elems[e, :3]):
                problems.append(
                    f"interface nodes not shared over triangle {t} between "
                    f"layers {li} and {li + 1}"
                )

    # projection of each layer's wedges reproduces its coverage tags
    for li, entry in enumerate(mesh.stack):
        projected = set(map(int, mesh.element_tri[mesh.element_layer == li]))
        covered = set(map(int, np.nonzero(mesh.mesh2d.covered(entry.name))[0]))
        if projected != covered:
            problems.append(
                f"layer {entry.name!r}: projected triangles do not match coverage"
            )
    return problems
