"""2D layer geometry for shrink-film / kirigami composites.

All coordinates are millimetres. A :class:`PlanarLayout` holds an ordered
set of named layers (each a list of polygons with holes) plus the footprint
region every layer must lie inside. Constructors for the built-in pattern
families live here, together with the reflect / aspect-scale transforms and
the plain-text + SVG exchange formats.

Circular arcs are polygonized with a maximum chord deviation (default
0.05 mm). Coincident boundaries between layers (e.g. petal arcs on the
substrate rim) are generated from the same angular subdivisions so that
downstream meshing sees bitwise-identical vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.ops import unary_union

from .errors import (
    DegenerateGeometryError,
    GeometryConflictError,
    ParameterDomainError,
    PolygonFormatError,
)

# Maximum chord deviation for arc polygonization, mm. Below typical mesh
# edge lengths, so the solver never sees the faceting.
DEFAULT_CHORD_TOL = 0.05

# Containment / disjointness tolerance for layout validation, mm.
CONTAINMENT_TOL = 1e-9


# ---------------------------------------------------------------------------
# rings and polygons


def ring_area(ring: np.ndarray) -> float:
    """Signed shoelace area of a closed ring given as (n, 2) vertices."""
    x = ring[:, 0]
    y = ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _as_ring(points) -> np.ndarray:
    ring = np.asarray(points, dtype=float)
    if ring.ndim != 2 or ring.shape[1] != 2 or ring.shape[0] < 3:
        raise PolygonFormatError("a ring needs at least 3 (x, y) vertices")
    # drop an explicit closing vertex
    if np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if ring.shape[0] < 3:
        raise PolygonFormatError("a ring needs at least 3 distinct vertices")
    return ring


@dataclass
class Polygon:
    """Simple polygon with optional holes.

    The outer ring is counter-clockwise (signed area > 0), holes are
    clockwise and strictly inside the outer ring.
    """

    outer: np.ndarray
    holes: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def make(cls, outer, holes=()) -> "Polygon":
        """Build with orientation normalization (outer CCW, holes CW)."""
        ring = _as_ring(outer)
        if ring_area(ring) < 0:
            ring = ring[::-1].copy()
        hs = []
        for h in holes:
            hr = _as_ring(h)
            if ring_area(hr) > 0:
                hr = hr[::-1].copy()
            hs.append(hr)
        return cls(ring, hs)

    def area(self) -> float:
        """Net area (outer minus holes)."""
        return ring_area(self.outer) + sum(ring_area(h) for h in self.holes)

    def rings(self):
        yield self.outer
        yield from self.holes

    def to_shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.outer, [h for h in self.holes])

    def transformed(self, fn) -> "Polygon":
        """Apply a point-wise map and re-normalize ring orientations."""
        return Polygon.make(fn(self.outer), [fn(h) for h in self.holes])

    def mirrored(self, axis: str) -> "Polygon":
        if axis == "x":  # mirror about the x-axis: y -> -y
            m = np.array([1.0, -1.0])
        elif axis == "y":
            m = np.array([-1.0, 1.0])
        else:
            raise ParameterDomainError(f"axis must be 'x' or 'y', got {axis!r}")
        return self.transformed(lambda r: r * m)

    def scaled(self, sx: float, sy: float, anchor) -> "Polygon":
        a = np.asarray(anchor, dtype=float)
        s = np.array([sx, sy])
        return self.transformed(lambda r: (r - a) * s + a)

    def rotated(self, angle_rad: float, about=(0.0, 0.0)) -> "Polygon":
        c, s = math.cos(angle_rad), math.sin(angle_rad)
        rot = np.array([[c, -s], [s, c]])
        a = np.asarray(about, dtype=float)
        return self.transformed(lambda r: (r - a) @ rot.T + a)

    def centroid(self) -> np.ndarray:
        """Area centroid of the outer ring (holes ignored)."""
        r = self.outer
        nxt = np.roll(r, -1, axis=0)
        cross = r[:, 0] * nxt[:, 1] - nxt[:, 0] * r[:, 1]
        a = cross.sum() / 2.0
        cx = ((r[:, 0] + nxt[:, 0]) * cross).sum() / (6.0 * a)
        cy = ((r[:, 1] + nxt[:, 1]) * cross).sum() / (6.0 * a)
        return np.array([cx, cy])


def region_area(polygons) -> float:
    return sum(p.area() for p in polygons)


def points_in_ring(points: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Vectorized even-odd point-in-ring test (boundary points undefined)."""
    pts = np.atleast_2d(points)
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = ring[:, 0][None, :], ring[:, 1][None, :]
    x1, y1 = np.roll(ring[:, 0], -1)[None, :], np.roll(ring[:, 1], -1)[None, :]
    crosses = (y0 <= y) != (y1 <= y)
    dy = np.where(crosses, y1 - y0, 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / dy
    return (np.sum(crosses & (x < xint), axis=1) % 2).astype(bool)


def points_in_region(points: np.ndarray, polygons) -> np.ndarray:
    """True for points inside any polygon's outer ring and outside its holes."""
    pts = np.atleast_2d(points)
    inside = np.zeros(len(pts), dtype=bool)
    for poly in polygons:
        local = points_in_ring(pts, poly.outer)
        for h in poly.holes:
            local &= ~points_in_ring(pts, h)
        inside |= local
    return inside


# ---------------------------------------------------------------------------
# layouts


@dataclass
class PlanarLayout:
    """Ordered, named layer regions plus the footprint that bounds them."""

    layers: list[tuple[str, list[Polygon]]]
    footprint: list[Polygon]
    normalized_on_import: bool = False

    def layer_names(self) -> list[str]:
        return [name for name, _ in self.layers]

    def layer(self, name: str) -> list[Polygon]:
        for n, polys in self.layers:
            if n == name:
                return polys
        raise KeyError(f"layout has no layer named {name!r}")

    def has_layer(self, name: str) -> bool:
        return name in self.layer_names()

    def layer_area(self, name: str) -> float:
        return region_area(self.layer(name))

    def replace_layer(self, name: str, polygons: list[Polygon]) -> "PlanarLayout":
        layers = [(n, polygons if n == name else ps) for n, ps in self.layers]
        return PlanarLayout(layers, self.footprint, self.normalized_on_import)

    def all_polygons(self):
        for _, polys in self.layers:
            yield from polys


def validate_layout(layout: PlanarLayout, tol: float = CONTAINMENT_TOL) -> list[str]:
    """Independent invariant walk; returns a list of violation messages.

    Checks ring simplicity and orientation, hole containment/disjointness,
    per-layer interior disjointness and footprint containment. Intended as
    the second route of the dual validation: constructors guarantee these
    by build, this walks the result from scratch.
    """
    problems: list[str] = []

    def check_polygon(poly: Polygon, label: str):
        if ring_area(poly.outer) <= 0:
            problems.append(f"{label}: outer ring not CCW / zero area")
        outer_sh = ShapelyPolygon(poly.outer)
        if not outer_sh.is_valid:
            problems.append(f"{label}: outer ring is not simple")
            return
        for k, h in enumerate(poly.holes):
            if ring_area(h) >= 0:
                problems.append(f"{label} hole {k}: not CW / zero area")
            hole_sh = ShapelyPolygon(h)
            if not hole_sh.is_valid:
                problems.append(f"{label} hole {k}: ring is not simple")
                continue
            if not hole_sh.within(outer_sh.buffer(tol)):
                problems.append(f"{label} hole {k}: not inside the outer ring")
            for j in range(k):
                other = ShapelyPolygon(poly.holes[j])
                if hole_sh.intersection(other).area > tol:
                    problems.append(f"{label} holes {j} and {k} overlap")

    for i, fp in enumerate(layout.footprint):
        check_polygon(fp, f"footprint[{i}]")
    try:
        fp_union = unary_union([p.to_shapely() for p in layout.footprint]).buffer(tol)
    except Exception:
        fp_union = None
        problems.append("footprint: could not form union for containment check")

    for name, polys in layout.layers:
        for i, poly in enumerate(polys):
            label = f"layer {name!r}[{i}]"
            check_polygon(poly, label)
            sh = poly.to_shapely()
            if not sh.is_valid:
                continue
            if fp_union is not None and not sh.within(fp_union):
                problems.append(f"{label}: escapes the footprint")
            for j in range(i):
                other = polys[j].to_shapely()
                if sh.intersection(other).area > tol:
                    problems.append(f"layer {name!r}: polygons {j} and {i} overlap")
    return problems


# ---------------------------------------------------------------------------
# pattern specs


@dataclass(frozen=True)
class LotusSpec:
    """Disk substrate with a central kirigami disk plus radial petals.

    ``gamma`` is the inner-to-outer radius ratio; ``petal_fill`` the angular
    fraction of each petal slot that the petal occupies (0.5 keeps half the
    annulus uncovered, which makes the removed fraction 0.5*(1-gamma^2)).
    """

    R: float
    gamma: float
    n_petals: int = 8
    petal_fill: float = 0.5

    def __post_init__(self):
        if self.R <= 0:
            raise ParameterDomainError("lotus: R must be > 0")
        if not 0.0 < self.gamma <= 1.0:
            raise ParameterDomainError("lotus: gamma must be in (0, 1]")
        if self.n_petals < 1 or int(self.n_petals) != self.n_petals:
            raise ParameterDomainError("lotus: n_petals must be an integer >= 1")
        if not 0.0 < self.petal_fill <= 1.0:
            raise ParameterDomainError("lotus: petal_fill must be in (0, 1]")


@dataclass(frozen=True)
class StripSpec:
    """Rectangular bimorph strip, centered on the origin, long axis x."""

    length: float
    width: float

    def __post_init__(self):
        if self.length <= 0 or self.width <= 0:
            raise ParameterDomainError("strip: length and width must be > 0")


@dataclass(frozen=True)
class PyramidCrossSpec:
    """Disk substrate; kirigami covers all but n_arms radial fold slots."""

    R: float
    arm_width: float
    n_arms: int = 4

    def __post_init__(self):
        if self.R <= 0 or self.arm_width <= 0:
            raise ParameterDomainError("pyramid: R and arm_width must be > 0")
        if self.n_arms < 2:
            raise ParameterDomainError("pyramid: n_arms must be >= 2")
        if self.arm_width / (2.0 * self.R) >= math.sin(math.pi / self.n_arms):
            raise ParameterDomainError("pyramid: arms too wide, slots intersect")


@dataclass(frozen=True)
class AnnulusRimSpec:
    """Trilayer rimmed plate: disk base, kirigami core, petal rim on top."""

    R: float
    r_inner: float
    n_petals: int = 8
    petal_fill: float = 0.5

    def __post_init__(self):
        if self.R <= 0 or not 0.0 < self.r_inner < self.R:
            raise ParameterDomainError("annulus rim: need 0 < r_inner < R")
        if self.n_petals < 1:
            raise ParameterDomainError("annulus rim: n_petals must be >= 1")
        if not 0.0 < self.petal_fill <= 1.0:
            raise ParameterDomainError("annulus rim: petal_fill must be in (0, 1]")


@dataclass(frozen=True)
class SpoonSpec:
    """Trilayer spoon: disk bowl substrate, keyhole kirigami, strip handle on
    top. The handle attaches flush at the chord where it meets the disk."""

    R: float
    gamma: float = 0.5
    handle_length: float = 45.0
    handle_width: float = 10.0
    kirigami_margin: float = 2.0

    def __post_init__(self):
        if self.R <= 0 or self.handle_length <= 0:
            raise ParameterDomainError("spoon: R and handle_length must be > 0")
        if not 0.0 < self.gamma < 1.0:
            raise ParameterDomainError("spoon: gamma must be in (0, 1)")
        if not 0.0 < self.handle_width < 2.0 * self.R:
            raise ParameterDomainError("spoon: handle_width must be in (0, 2R)")
        wk = self.handle_width - 2.0 * self.kirigami_margin
        if wk <= 0:
            raise ParameterDomainError("spoon: margin leaves no kirigami tab width")
        if wk / 2.0 >= self.gamma * self.R:
            raise ParameterDomainError("spoon: kirigami tab wider than inner disk")


@dataclass(frozen=True)
class CustomSpec:
    """Layout imported from a polygon text file."""

    path: str


PatternSpec = LotusSpec | StripSpec | PyramidCrossSpec | AnnulusRimSpec | SpoonSpec | CustomSpec


# ---------------------------------------------------------------------------
# arc helpers

# Arc endpoints and interior subdivisions are pure functions of
# (radius, angle range, tolerance): layers sharing a boundary arc call this
# with identical arguments and therefore get bitwise-identical vertices.


def _arc_step(radius: float, chord_tol: float) -> float:
    t = min(chord_tol, radius)
    return 2.0 * math.acos(max(0.0, 1.0 - t / radius))


def arc_points(radius: float, a0: float, a1: float, chord_tol: float) -> np.ndarray:
    """Points on a CCW arc from angle a0 to a1 (radians), endpoints included."""
    span = a1 - a0
    n = max(1, int(math.ceil(abs(span) / _arc_step(radius, chord_tol))))
    ang = a0 + span * (np.arange(n + 1) / n)
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])


def circle_ring(radius: float, chord_tol: float, breakpoints=()) -> np.ndarray:
    """Full-circle CCW ring whose vertices include every breakpoint angle."""
    bks = sorted({float(b) % (2.0 * math.pi) for b in breakpoints})
    if not bks:
        bks = [0.0]
    pts = []
    for i, a0 in enumerate(bks):
        a1 = bks[(i + 1) % len(bks)]
        if i == len(bks) - 1:
            a1 += 2.0 * math.pi
        pts.append(arc_points(radius, a0, a1, chord_tol)[:-1])
    return np.vstack(pts)


# ---------------------------------------------------------------------------
# builders

SUBSTRATE = "substrate"
KIRIGAMI = "kirigami"


def build_lotus(spec: LotusSpec, chord_tol: float = DEFAULT_CHORD_TOL) -> PlanarLayout:
    """Disk substrate + central-disk-and-petals kirigami layer.

    Petals are annular sectors from gamma*R to R, each spanning
    petal_fill * (2 pi / n_petals) of arc, equally spaced with the first
    petal centered on the +x axis.
    """
    R, g, n, fill = spec.R, spec.gamma, spec.n_petals, spec.petal_fill
    two_pi = 2.0 * math.pi

    if g >= 1.0:
        disk = Polygon.make(circle_ring(R, chord_tol))
        return PlanarLayout(
            layers=[(SUBSTRATE, [disk]), (KIRIGAMI, [Polygon.make(disk.outer.copy())])],
            footprint=[Polygon.make(disk.outer.copy())],
        )

    slot = two_pi / n
    half = 0.5 * fill * slot
    spans = [((j * slot - half) % two_pi, half * 2.0) for j in range(n)]
    corners = []
    for start, width in spans:
        corners.extend([start, start + width])

    substrate_ring = circle_ring(R, chord_tol, breakpoints=corners)
    inner_ring = circle_ring(g * R, chord_tol, breakpoints=corners)

    petals = []
    for start, width in spans:
        outer_arc = arc_points(R, start, start + width, chord_tol)
        inner_arc = arc_points(g * R, start, start + width, chord_tol)[::-1]
        petals.append(Polygon.make(np.vstack([outer_arc, inner_arc])))

    layers = [
        (SUBSTRATE, [Polygon.make(substrate_ring)]),
        (KIRIGAMI, [Polygon.make(inner_ring)] + petals),
    ]
    return PlanarLayout(layers, footprint=[Polygon.make(substrate_ring.copy())])


def build_strip(spec: StripSpec, kirigami_margin: float = 0.0) -> PlanarLayout:
    """Bimorph strip: full-rectangle substrate, kirigami inset on the long
    edges by ``kirigami_margin`` (0 means full coverage)."""
    if kirigami_margin < 0:
        raise ParameterDomainError("strip: kirigami_margin must be >= 0")
    if 2.0 * kirigami_margin >= spec.width:
        raise ParameterDomainError(
            f"strip: margin {kirigami_margin} leaves no kirigami width "
            f"(width {spec.width})"
        )
    hl, hw = spec.length / 2.0, spec.width / 2.0
    outer = np.array([[-hl, -hw], [hl, -hw], [hl, hw], [-hl, hw]])
    hk = hw - kirigami_margin
    inner = np.array([[-hl, -hk], [hl, -hk], [hl, hk], [-hl, hk]])
    return PlanarLayout(
        layers=[(SUBSTRATE, [Polygon.make(outer)]), (KIRIGAMI, [Polygon.make(inner)])],
        footprint=[Polygon.make(outer.copy())],
    )


def build_pyramid_cross(
    spec: PyramidCrossSpec, chord_tol: float = DEFAULT_CHORD_TOL
) -> PlanarLayout:
    """Disk substrate; kirigami sectors separated by n radial fold slots.

    Slot dimensions are a declared approximation: each slot is a straight
    band of the given width running from the center past the rim, leaving
    n_arms kirigami sectors whose tips meet near the center.
    """
    R, w, n = spec.R, spec.arm_width, spec.n_arms
    two_pi = 2.0 * math.pi
    beta = math.asin(w / (2.0 * R))  # slot half-opening at the rim

    # rim angles of sector i: from slot i's left edge to slot i+1's right edge
    corners = []
    sector_spans = []
    for i in range(n):
        phi_i = two_pi * i / n
        phi_j = two_pi * (i + 1) / n
        a = phi_i + beta
        b = phi_j - beta
        sector_spans.append((phi_i, phi_j, a, b))
        corners.extend([a, b])

    substrate_ring = circle_ring(R, chord_tol, breakpoints=corners)
    sectors = []
    for phi_i, phi_j, a, b in sector_spans:
        # inner tip: intersection of the two slot edge lines
        d_i = np.array([math.cos(phi_i), math.sin(phi_i)])
        n_i = np.array([-d_i[1], d_i[0]])
        d_j = np.array([math.cos(phi_j), math.sin(phi_j)])
        n_j = np.array([-d_j[1], d_j[0]])
        # p = t*d_i + (w/2)*n_i = s*d_j - (w/2)*n_j
        mat = np.column_stack([d_i, -d_j])
        rhs = -(w / 2.0) * (n_i + n_j)
        t, s = np.linalg.solve(mat, rhs)
        tip = t * d_i + (w / 2.0) * n_i
        arc = arc_points(R, a, b, chord_tol)
        sectors.append(Polygon.make(np.vstack([tip[None, :], arc])))

    return PlanarLayout(
        layers=[(SUBSTRATE, [Polygon.make(substrate_ring)]), (KIRIGAMI, sectors)],
        footprint=[Polygon.make(substrate_ring.copy())],
    )


RIM = "rim"


def build_annulus_rim(
    spec: AnnulusRimSpec, chord_tol: float = DEFAULT_CHORD_TOL
) -> PlanarLayout:
    """Rimmed-plate trilayer: substrate disk, kirigami core disk plus petal
    backings, and a top shrink layer of rim petals from r_inner to R."""
    R, ri, n, fill = spec.R, spec.r_inner, spec.n_petals, spec.petal_fill
    two_pi = 2.0 * math.pi
    slot = two_pi / n
    half = 0.5 * fill * slot
    spans = [((j * slot - half) % two_pi, 2.0 * half) for j in range(n)]
    corners = []
    for start, width in spans:
        corners.extend([start, start + width])

    substrate_ring = circle_ring(R, chord_tol, breakpoints=corners)
    core_ring = circle_ring(ri, chord_tol, breakpoints=corners)

    petals = []
    for start, width in spans:
        outer_arc = arc_points(R, start, start + width, chord_tol)
        inner_arc = arc_points(ri, start, start + width, chord_tol)[::-1]
        petals.append(Polygon.make(np.vstack([outer_arc, inner_arc])))
    # kirigami backs each rim petal with an identical sector
    backing = [Polygon.make(p.outer.copy()) for p in petals]

    layers = [
        (SUBSTRATE, [Polygon.make(substrate_ring)]),
        (KIRIGAMI, [Polygon.make(core_ring)] + backing),
        (RIM, petals),
    ]
    return PlanarLayout(layers, footprint=[Polygon.make(substrate_ring.copy())])


HANDLE = "handle"


def _keyhole_ring(radius, tab_half_width, tab_x_end, chord_tol) -> np.ndarray:
    """Disk-with-tab outline: circle arc the long way round, plus a
    rectangular tab reaching to ``tab_x_end`` on the +x side."""
    theta = math.asin(tab_half_width / radius)
    arc = arc_points(radius, theta, 2.0 * math.pi - theta, chord_tol)
    tab = np.array([[tab_x_end, -tab_half_width], [tab_x_end, tab_half_width]])
    return np.vstack([arc, tab])


def build_spoon(spec: SpoonSpec, chord_tol: float = DEFAULT_CHORD_TOL) -> PlanarLayout:
    """Trilayer spoon layout.

    Bottom shrink layer: disk of radius R (the bowl). Top shrink layer: the
    handle strip, attached flush at the chord x = R cos(asin(w/2R)). The
    kirigami keyhole bridges both across the chord so the stack is bonded
    through shared interface nodes.
    """
    R, g = spec.R, spec.gamma
    w = spec.handle_width
    m = spec.kirigami_margin
    theta0 = math.asin(w / (2.0 * R))
    x_chord = R * math.cos(theta0)
    x_end = x_chord + spec.handle_length

    footprint = Polygon.make(_keyhole_ring(R, w / 2.0, x_end, chord_tol))

    # bowl disk: same arc subdivision as the footprint's circular part
    long_arc = arc_points(R, theta0, 2.0 * math.pi - theta0, chord_tol)
    short_arc = arc_points(R, -theta0, theta0, chord_tol)
    disk = Polygon.make(np.vstack([long_arc[:-1], short_arc[:-1]]))

    handle = Polygon.make(
        np.array([[x_chord, -w / 2.0], [x_end, -w / 2.0], [x_end, w / 2.0], [x_chord, w / 2.0]])
    )

    keyhole = Polygon.make(
        _keyhole_ring(g * R, w / 2.0 - m, x_end - m, chord_tol)
    )

    layers = [
        (SUBSTRATE, [disk]),
        (KIRIGAMI, [keyhole]),
        (HANDLE, [handle]),
    ]
    return PlanarLayout(layers, footprint=[footprint])


def build_layout(spec: PatternSpec, chord_tol: float = DEFAULT_CHORD_TOL, **kw) -> PlanarLayout:
    """Dispatch a pattern spec to its builder."""
    if isinstance(spec, LotusSpec):
        return build_lotus(spec, chord_tol)
    if isinstance(spec, StripSpec):
        return build_strip(spec, kw.get("kirigami_margin", 0.0))
    if isinstance(spec, PyramidCrossSpec):
        return build_pyramid_cross(spec, chord_tol)
    if isinstance(spec, AnnulusRimSpec):
        return build_annulus_rim(spec, chord_tol)
    if isinstance(spec, SpoonSpec):
        return build_spoon(spec, chord_tol)
    if isinstance(spec, CustomSpec):
        return import_polygons(spec.path)
    raise ParameterDomainError(f"unknown pattern spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# transforms


def _check_transform_result(
    layout: PlanarLayout, layer_name: str, polygons: list[Polygon], tol=CONTAINMENT_TOL
):
    candidate = layout.replace_layer(layer_name, polygons)
    problems = validate_layout(candidate, tol)
    if problems:
        raise GeometryConflictError("; ".join(problems))
    return candidate


def reflect_layer(
    layout: PlanarLayout, layer_name: str, axis: str, selection=None
) -> PlanarLayout:
    """Mirror selected polygons of one layer about the x or y axis.

    Ring orientations are re-normalized. Raises GeometryConflictError if a
    mirrored polygon overlaps an unselected one or escapes the footprint.
    """
    polys = layout.layer(layer_name)
    idx = range(len(polys)) if selection is None else list(selection)
    for i in idx:
        if not 0 <= i < len(polys):
            raise ParameterDomainError(
                f"selection index {i} out of range for layer {layer_name!r}"
            )
    new_polys = [
        p.mirrored(axis) if i in set(idx) else p for i, p in enumerate(polys)
    ]
    return _check_transform_result(layout, layer_name, new_polys)


def scale_layer_aspect(
    layout: PlanarLayout,
    layer_name: str,
    selection,
    sx: float,
    sy: float,
    anchor=None,
) -> PlanarLayout:
    """Anisotropic scaling of selected polygons about an anchor point.

    Each scaled polygon's area is multiplied by exactly sx*sy. The anchor
    defaults to the centroid of the selection's first polygon.
    """
    if sx <= 0 or sy <= 0:
        raise ParameterDomainError("scale factors must be > 0")
    polys = layout.layer(layer_name)
    idx = list(range(len(polys))) if selection is None else list(selection)
    for i in idx:
        if not 0 <= i < len(polys):
            raise ParameterDomainError(
                f"selection index {i} out of range for layer {layer_name!r}"
            )
    if anchor is None:
        anchor = polys[idx[0]].centroid()
    chosen = set(idx)
    new_polys = [
        p.scaled(sx, sy, anchor) if i in chosen else p for i, p in enumerate(polys)
    ]
    return _check_transform_result(layout, layer_name, new_polys)


def removed_fraction(layout: PlanarLayout) -> float:
    """Fraction of the substrate left uncovered by the kirigami layer."""
    if not (layout.has_layer(SUBSTRATE) and layout.has_layer(KIRIGAMI)):
        raise ParameterDomainError(
            "removed_fraction needs layers named 'substrate' and 'kirigami'"
        )
    a_sub = layout.layer_area(SUBSTRATE)
    if a_sub <= 0:
        raise DegenerateGeometryError("substrate area is zero")
    return 1.0 - layout.layer_area(KIRIGAMI) / a_sub


# ---------------------------------------------------------------------------
# plain-text polygon format
#
#   # comment
#   FOOTPRINT            (optional section; defaults to the substrate layer)
#   P x0 y0 x1 y1 ...    outer ring
#   H x0 y0 ...          hole in the preceding outer
#   LAYER substrate
#   P ...
#
# Coordinates in mm. Rings are auto-closed; orientation is normalized on
# import (flagged on the layout), figure-eight rings are rejected.

FOOTPRINT_HEADER = "FOOTPRINT"


def export_polygons(layout: PlanarLayout, path) -> None:
    lines = ["# shrinkmorph polygon layout, coordinates in mm"]

    def ring_line(tag, ring):
        coords = " ".join(f"{v:.12g}" for v in np.asarray(ring).ravel())
        return f"{tag} {coords}"

    lines.append(FOOTPRINT_HEADER)
    for poly in layout.footprint:
        lines.append(ring_line("P", poly.outer))
        for h in poly.holes:
            lines.append(ring_line("H", h))
    for name, polys in layout.layers:
        lines.append(f"LAYER {name}")
        for poly in polys:
            lines.append(ring_line("P", poly.outer))
            for h in poly.holes:
                lines.append(ring_line("H", h))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_ring(tokens, lineno) -> np.ndarray:
    try:
        vals = [float(t) for t in tokens]
    except ValueError as e:
        raise PolygonFormatError(f"line {lineno}: non-numeric coordinate ({e})")
    if len(vals) < 6 or len(vals) % 2:
        raise PolygonFormatError(
            f"line {lineno}: ring needs an even number of >= 6 coordinates"
        )
    return np.array(vals, dtype=float).reshape(-1, 2)


def import_polygons(path) -> PlanarLayout:
    """Read the plain-text polygon format, validating ring invariants.

    CW outer rings are re-oriented (the layout's ``normalized_on_import``
    flag is set); self-intersecting rings are rejected with their line
    number.
    """
    sections: list[tuple[str, list[Polygon]]] = []
    footprint: list[Polygon] = []
    current: list[Polygon] | None = None
    current_is_footprint = False
    normalized = False

    def add_ring(tag, ring, lineno):
        nonlocal normalized
        target = footprint if current_is_footprint else current
        if target is None:
            raise PolygonFormatError(f"line {lineno}: ring before any LAYER header")
        if not ShapelyPolygon(ring).is_valid:
            raise PolygonFormatError(f"line {lineno}: ring is not simple")
        area = ring_area(ring)
        if abs(area) <= 0.0:
            raise PolygonFormatError(f"line {lineno}: zero-area ring")
        if tag == "P":
            if area < 0:
                normalized = True
                ring = ring[::-1].copy()
            target.append(Polygon(ring, []))
        else:
            if not target:
                raise PolygonFormatError(f"line {lineno}: hole before any outer ring")
            if area > 0:
                normalized = True
                ring = ring[::-1].copy()
            target[-1].holes.append(ring)

    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].upper()
        if head == FOOTPRINT_HEADER:
            current_is_footprint = True
            current = None
        elif head == "LAYER":
            if len(tokens) != 2:
                raise PolygonFormatError(f"line {lineno}: LAYER needs exactly one name")
            current = []
            current_is_footprint = False
            sections.append((tokens[1], current))
        elif head in ("P", "H"):
            add_ring(head, _parse_ring(tokens[1:], lineno), lineno)
        else:
            raise PolygonFormatError(f"line {lineno}: unknown directive {tokens[0]!r}")

    if not sections:
        raise PolygonFormatError(f"{path}: no LAYER sections found")
    if not footprint:
        by_name = dict(sections)
        source = by_name.get(SUBSTRATE, sections[0][1])
        footprint = [Polygon(p.outer.copy(), [h.copy() for h in p.holes]) for p in source]

    layout = PlanarLayout(sections, footprint, normalized_on_import=normalized)
    problems = validate_layout(layout)
    if problems:
        raise PolygonFormatError(f"{path}: " + "; ".join(problems))
    return layout


# ---------------------------------------------------------------------------
# SVG export (outlines only, for visual inspection)

_LAYER_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]


def export_svg(layout: PlanarLayout, path, stroke_width: float = 0.3) -> None:
    pts = np.vstack([p.outer for p in layout.footprint])
    lo = pts.min(axis=0) - 2.0
    hi = pts.max(axis=0) + 2.0
    size = hi - lo

    def path_d(poly: Polygon) -> str:
        parts = []
        for ring in poly.rings():
            coords = " L ".join(f"{x:.4f} {y:.4f}" for x, y in ring)
            parts.append(f"M {coords} Z")
        return " ".join(parts)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{lo[0]:.3f} {lo[1]:.3f} '
        f'{size[0]:.3f} {size[1]:.3f}" width="{size[0]:.1f}mm" height="{size[1]:.1f}mm">',
        # mm coordinates, y flipped so +y is up on screen
        f'<g transform="translate(0 {lo[1] + hi[1]:.4f}) scale(1 -1)">',
    ]
    for fp in layout.footprint:
        lines.append(
            f'<path d="{path_d(fp)}" fill="none" stroke="#888888" '
            f'stroke-width="{stroke_width}" stroke-dasharray="2 1"/>'
        )
    for k, (name, polys) in enumerate(layout.layers):
        color = _LAYER_COLORS[k % len(_LAYER_COLORS)]
        for poly in polys:
            lines.append(
                f'<path d="{path_d(poly)}" fill="none" stroke="{color}" '
                f'stroke-width="{stroke_width}"><title>{name}</title></path>'
            )
    lines.extend(["</g>", "</svg>"])
    Path(path).write_text("\n".join(lines) + "\n")
