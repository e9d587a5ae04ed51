"""Conforming Delaunay triangulation with quality/size refinement.

The footprint of a layout is meshed once, with every layer's boundary rings
inserted as constraint segments; per-layer membership is then tagged on each
triangle via centroid tests. This guarantees that stacked layers share the
same in-plane triangulation, which is what later makes interface nodes
shared by construction.

The algorithm is a batched Ruppert-style refinement on top of repeated
(unconstrained) Delaunay passes:

1. collect + snap-deduplicate all ring vertices and segments, resolving
   segment crossings and T-junctions by splitting,
2. pre-split segments to the target edge length,
3. iterate: Delaunay of the current points; any constraint segment missing
   from the edge set is split at its midpoint (conformity),
4. refine: bad triangles (too large or below the minimum angle) request
   their circumcenter; candidates that would encroach a constraint segment
   split that segment instead; a minimum-separation filter keeps batches
   well spaced,
5. filter triangles to the footprint region and tag per-layer coverage.

Quality targets unreachable at sharp input corners are reported in the
mesh's warning list instead of failing the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from ..errors import DegenerateGeometryError, MeshingError
from ..geometry import PlanarLayout, points_in_region

SNAP = 1e-9  # vertex welding tolerance, mm
MAX_ROUNDS = 60


@dataclass
class TriMesh2D:
    """Conforming 2D triangle mesh with per-triangle layer coverage."""

    nodes: np.ndarray  # (n, 2) mm
    triangles: np.ndarray  # (m, 3) int, CCW
    coverage: np.ndarray  # (m,) uint32 bitmask over layer_names
    layer_names: list[str]
    boundary_edges: np.ndarray  # (k, 2) int constrained subsegments
    h_target: float
    min_angle: float
    warnings: list[str] = field(default_factory=list)

    def layer_bit(self, name: str) -> int:
        return 1 << self.layer_names.index(name)

    def covered(self, name: str) -> np.ndarray:
        """Boolean mask of triangles covered by the named layer."""
        return (self.coverage & self.layer_bit(name)) != 0

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * np.abs(
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def hull_edges(self) -> np.ndarray:
        """Edges referenced by exactly one triangle: the footprint boundary."""
        e = np.vstack(
            [self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]
        )
        e = np.sort(e, axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq[counts == 1]

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.hull_edges())


class _PointStore:
    """Deduplicating point registry on a snap lattice."""

    def __init__(self, snap: float = SNAP):
        self.snap = snap
        self.coords: list[tuple[float, float]] = []
        self._index: dict[tuple[int, int], int] = {}

    def add(self, x: float, y: float) -> int:
        key = (round(x / self.snap), round(y / self.snap))
        idx = self._index.get(key)
        if idx is None:
            idx = len(self.coords)
            self.coords.append((float(x), float(y)))
            self._index[key] = idx
        return idx

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def __len__(self):
        return len(self.coords)


def _seg_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _collect_constraints(layout: PlanarLayout):
    """Ring vertices and segments from the footprint and every layer."""
    store = _PointStore()
    segments: dict[tuple[int, int], None] = {}

    def add_ring(ring: np.ndarray):
        ids = [store.add(x, y) for x, y in ring]
        for i in range(len(ids)):
            a, b = ids[i], ids[(i + 1) % len(ids)]
            if a != b:
                segments[_seg_key(a, b)] = None

    for poly in layout.footprint:
        for ring in poly.rings():
            add_ring(ring)
    for _, polys in layout.layers:
        for poly in polys:
            for ring in poly.rings():
                add_ring(ring)
    return store, list(segments.keys())


def _resolve_intersections(store: _PointStore, segments: list[tuple[int, int]]):
    """Split segments at proper crossings and at points lying on them.

    Layers may legitimately cross each other's boundaries (e.g. a bridging
    piece crossing the substrate rim), which a conforming triangulation can
    only represent after splitting at the intersection points.
    """
    eps = 1e-12
    for _ in range(12):
        pts = store.array()
        segs = np.array(sorted(segments), dtype=int)
        changed = False

        # T-junctions: existing points sitting on a segment interior
        p0 = pts[segs[:, 0]]
        d = pts[segs[:, 1]] - p0
        seg_len2 = np.einsum("ij,ij->i", d, d)
        new_segments: list[tuple[int, int]] = []
        split_points: dict[int, list[tuple[float, int]]] = {}
        tree = cKDTree(pts)
        mids = p0 + 0.5 * d
        radii = 0.5 * np.sqrt(seg_len2)
        near = tree.query_ball_point(mids, radii + 10 * SNAP)
        for si, candidates in enumerate(near):
            a, b = segs[si]
            for pi in candidates:
                if pi == a or pi == b:
                    continue
                t = np.dot(pts[pi] - p0[si], d[si]) / seg_len2[si]
                if t <= eps or t >= 1.0 - eps:
                    continue
                closest = p0[si] + t * d[si]
                if np.hypot(*(pts[pi] - closest)) <= 10 * SNAP:
                    split_points.setdefault(si, []).append((t, pi))

        # proper pairwise crossings
        n = len(segs)
        if n:
            a0 = p0
            a1 = pts[segs[:, 1]]
            for i in range(n):
                di = a1[i] - a0[i]
                qp = a0 - a0[i]
                denom = di[0] * (a1 - a0)[:, 1] - di[1] * (a1 - a0)[:, 0]
                with np.errstate(divide="ignore", invalid="ignore"):
                    t = (qp[:, 0] * (a1 - a0)[:, 1] - qp[:, 1] * (a1 - a0)[:, 0]) / denom
                    s = (qp[:, 0] * di[1] - qp[:, 1] * di[0]) / denom
                mask = (
                    (np.abs(denom) > eps)
                    & (t > 1e-9)
                    & (t < 1 - 1e-9)
                    & (s > 1e-9)
                    & (s < 1 - 1e-9)
                )
                mask[: i + 1] = False
                for j in np.nonzero(mask)[0]:
                    x = a0[i] + t[j] * di
                    pi = store.add(x[0], x[1])
                    split_points.setdefault(i, []).append((float(t[j]), pi))
                    split_points.setdefault(int(j), []).append((float(s[j]), pi))

        if not split_points:
            break
        changed = True
        for si in range(len(segs)):
            a, b = int(segs[si, 0]), int(segs[si, 1])
            if si not in split_points:
                new_segments.append(_seg_key(a, b))
                continue
            chain = sorted(set(split_points[si]))
            ids = [a] + [pi for _, pi in chain] + [b]
            for u, v in zip(ids[:-1], ids[1:]):
                if u != v:
                    new_segments.append(_seg_key(u, v))
        segments = sorted(set(new_segments))
        if not changed:
            break
    return segments


def _presplit(store: _PointStore, segments: list[tuple[int, int]], h: float):
    """Split constraint segments so none is longer than ~1.3 h."""
    out = []
    for a, b in segments:
        pa = np.array(store.coords[a])
        pb = np.array(store.coords[b])
        length = float(np.hypot(*(pb - pa)))
        n = max(1, int(math.ceil(length / (1.3 * h))))
        ids = [a]
        for k in range(1, n):
            x = pa + (pb - pa) * (k / n)
            ids.append(store.add(x[0], x[1]))
        ids.append(b)
        for u, v in zip(ids[:-1], ids[1:]):
            if u != v:
                out.append(_seg_key(u, v))
    return sorted(set(out))


def _edge_set(simplices: np.ndarray) -> set[tuple[int, int]]:
    e = np.vstack([simplices[:, [0, 1]], simplices[:, [1, 2]], simplices[:, [2, 0]]])
    e = np.sort(e, axis=1)
    return set(map(tuple, np.unique(e, axis=0)))


def _real_simplices(dt: Delaunay, pts: np.ndarray, h: float) -> np.ndarray:
    """Drop Qhull's zero-area sub-triangles of degenerate facets.

    Collinear constraint subdivisions (e.g. midpoints on chords) make Qhull
    emit exactly- or nearly-degenerate triangles under the 'Qt' option;
    keeping them would corrupt hull detection and the area audit.
    """
    tris = dt.simplices
    p = pts[tris]
    area2 = np.abs(
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    return tris[area2 > 2e-8 * h * h]


def _tri_quality(pts: np.ndarray, tris: np.ndarray):
    """Edge lengths, areas, min angles (deg), circumcenters and radii."""
    p = pts[tris]
    e0 = p[:, 2] - p[:, 1]
    e1 = p[:, 0] - p[:, 2]
    e2 = p[:, 1] - p[:, 0]
    l0 = np.linalg.norm(e0, axis=1)
    l1 = np.linalg.norm(e1, axis=1)
    l2 = np.linalg.norm(e2, axis=1)
    lengths = np.column_stack([l0, l1, l2])
    area2 = e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0])  # 2*area, signed
    area = 0.5 * area2

    with np.errstate(invalid="ignore", divide="ignore"):
        cos0 = np.einsum("ij,ij->i", e2, -e1) / (l2 * l1)
        cos1 = np.einsum("ij,ij->i", e0, -e2) / (l0 * l2)
        cos2 = np.einsum("ij,ij->i", e1, -e0) / (l1 * l0)
    cosines = np.clip(np.column_stack([cos0, cos1, cos2]), -1.0, 1.0)
    min_angle = np.degrees(np.arccos(cosines.max(axis=1)))

    # circumcenter via perpendicular bisector intersection
    ax, ay = p[:, 0, 0], p[:, 0, 1]
    bx, by = p[:, 1, 0], p[:, 1, 1]
    cx, cy = p[:, 2, 0], p[:, 2, 1]
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (
            (ax**2 + ay**2) * (by - cy)
            + (bx**2 + by**2) * (cy - ay)
            + (cx**2 + cy**2) * (ay - by)
        ) / d
        uy = (
            (ax**2 + ay**2) * (cx - bx)
            + (bx**2 + by**2) * (ax - cx)
            + (cx**2 + cy**2) * (bx - ax)
        ) / d
    centers = np.column_stack([ux, uy])
    radii = np.linalg.norm(centers - p[:, 0], axis=1)
    return lengths, area, min_angle, centers, radii


def triangulate(
    layout: PlanarLayout,
    h_target: float,
    min_angle: float = 20.0,
    area_min: float = 1e-6,
) -> TriMesh2D:
    """Mesh the footprint with all layer boundaries as constraints.

    Triangle edge lengths target the band [0.3, 2.0] * h_target; violations
    and unreachable angle targets are reported as warnings, not failures.
    """
    if h_target <= 0:
        raise DegenerateGeometryError("h_target must be > 0")
    if not layout.footprint:
        raise DegenerateGeometryError("layout has no footprint")

    store, segments = _collect_constraints(layout)
    if len(store) < 3:
        raise DegenerateGeometryError("layout has fewer than 3 distinct vertices")
    segments = _resolve_intersections(store, segments)
    segments = _presplit(store, segments, h_target)

    warnings: list[str] = []
    seg_set = set(segments)

    def conform():
        """Delaunay + split missing constraint segments until conforming."""
        nonlocal seg_set
        for _ in range(30):
            pts = store.array()
            dt = Delaunay(pts)
            simplices = _real_simplices(dt, pts, h_target)
            edges = _edge_set(simplices)
            missing = [s for s in sorted(seg_set) if s not in edges]
            if not missing:
                return simplices, pts
            for a, b in missing:
                pa = np.array(store.coords[a])
                pb = np.array(store.coords[b])
                mid = 0.5 * (pa + pb)
                m = store.add(mid[0], mid[1])
                seg_set.discard(_seg_key(a, b))
                if m != a and m != b:
                    seg_set.add(_seg_key(a, m))
                    seg_set.add(_seg_key(m, b))
        raise MeshingError("constraint recovery did not converge")

    simplices, pts = conform()

    size_max = 1.8 * h_target
    floor = 0.35 * h_target
    sep = 0.5 * h_target

    for round_no in range(MAX_ROUNDS):
        inside = points_in_region(pts[simplices].mean(axis=1), layout.footprint)
        tris = simplices[inside]
        lengths, area, angles, centers, radii = _tri_quality(pts, tris)
        too_big = lengths.max(axis=1) > size_max
        bad_angle = (angles < min_angle) & (lengths.min(axis=1) >= floor)
        bad = np.nonzero(too_big | bad_angle)[0]
        if bad.size == 0:
            break

        # order by severity so the worst triangles win batch slots
        order = bad[np.argsort(-radii[bad], kind="stable")]
        seg_arr = np.array(sorted(seg_set), dtype=int)
        sp0 = pts[seg_arr[:, 0]]
        sp1 = pts[seg_arr[:, 1]]
        smid = 0.5 * (sp0 + sp1)
        srad = 0.5 * np.linalg.norm(sp1 - sp0, axis=1)

        tree = cKDTree(pts)
        accepted: list[tuple[float, float]] = []
        grid: dict[tuple[int, int], list[int]] = {}
        cell = sep
        split_requests: set[int] = set()

        def grid_ok(x, y):
            ci, cj = int(math.floor(x / cell)), int(math.floor(y / cell))
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    for k in grid.get((ci + di, cj + dj), ()):
                        qx, qy = accepted[k]
                        if (qx - x) ** 2 + (qy - y) ** 2 < sep * sep:
                            return False
            return True

        def grid_put(x, y):
            k = len(accepted)
            accepted.append((x, y))
            grid.setdefault(
                (int(math.floor(x / cell)), int(math.floor(y / cell))), []
            ).append(k)

        centers_in = points_in_region(centers[order], layout.footprint)
        for pos, ti in enumerate(order):
            c = centers[ti]
            if not np.isfinite(c).all():
                continue
            # encroachment: candidate inside a constraint's diametral circle
            d2 = np.einsum("ij,ij->i", smid - c, smid - c)
            enc = np.nonzero(d2 < (srad - 1e-12) ** 2)[0]
            if enc.size:
                split_requests.update(int(e) for e in enc)
                continue
            if not centers_in[pos]:
                # fall back to the longest interior edge midpoint
                tri = tris[ti]
                k = int(np.argmax(_tri_edge_lengths(pts, tri)))
                a, b = tri[(k + 1) % 3], tri[(k + 2) % 3]
                if _seg_key(int(a), int(b)) in seg_set:
                    continue
                c = 0.5 * (pts[a] + pts[b])
            if not grid_ok(c[0], c[1]):
                continue
            if tree.query(c, k=1)[0] < sep:
                continue
            grid_put(c[0], c[1])

        for si in sorted(split_requests):
            a, b = int(seg_arr[si, 0]), int(seg_arr[si, 1])
            key = _seg_key(a, b)
            if key not in seg_set:
                continue
            mid = 0.5 * (pts[a] + pts[b])
            m = store.add(mid[0], mid[1])
            if m == a or m == b:
                continue
            seg_set.discard(key)
            seg_set.add(_seg_key(a, m))
            seg_set.add(_seg_key(m, b))

        if not accepted and not split_requests:
            warnings.append(
                f"refinement stalled with {bad.size} below-target triangles"
            )
            break
        for x, y in accepted:
            store.add(x, y)
        simplices, pts = conform()
    else:
        warnings.append("refinement round limit reached")

    # final filtered mesh
    inside = points_in_region(pts[simplices].mean(axis=1), layout.footprint)
    tris = simplices[inside]
    if tris.size == 0:
        raise DegenerateGeometryError("no triangles fell inside the footprint")

    # orient CCW
    p = pts[tris]
    s = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 2, 0] - p[:, 0, 0]
    ) * (p[:, 1, 1] - p[:, 0, 1])
    flip = s < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]

    # drop unused points, renumber deterministically by old index
    used = np.unique(tris)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    nodes = pts[used]
    tris = remap[tris]
    bedges = np.array(
        [
            (remap[a], remap[b])
            for a, b in sorted(seg_set)
            if remap[a] >= 0 and remap[b] >= 0
        ],
        dtype=int,
    )

    lengths, area, angles, _, _ = _tri_quality(nodes, tris)
    if np.any(area < area_min):
        raise MeshingError(
            f"{int(np.sum(area < area_min))} triangles below area_min={area_min}"
        )
    lo, hi = 0.3 * h_target, 2.0 * h_target
    n_out = int(np.sum((lengths.min(axis=1) < lo) | (lengths.max(axis=1) > hi)))
    if n_out:
        warnings.append(
            f"{n_out} triangles have edges outside [{lo:.3g}, {hi:.3g}] mm"
        )
    n_sharp = int(np.sum(angles < min_angle - 1e-9))
    if n_sharp:
        warnings.append(
            f"{n_sharp} triangles below the {min_angle} deg angle target"
        )

    coverage = np.zeros(len(tris), dtype=np.uint32)
    centroids = nodes[tris].mean(axis=1)
    names = [name for name, _ in layout.layers]
    for bit, (name, polys) in enumerate(layout.layers):
        mask = points_in_region(centroids, polys)
        coverage[mask] |= np.uint32(1 << bit)

    return TriMesh2D(
        nodes=nodes,
        triangles=tris,
        coverage=coverage,
        layer_names=names,
        boundary_edges=bedges,
        h_target=h_target,
        min_angle=min_angle,
        warnings=warnings,
    )


def _tri_edge_lengths(pts, tri):
    p = pts[tri]
    return np.array(
        [
            np.hypot(*(p[2] - p[1])),
            np.hypot(*(p[0] - p[2])),
            np.hypot(*(p[1] - p[0])),
        ]
    )
