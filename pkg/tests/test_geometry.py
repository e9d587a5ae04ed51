"""Pattern construction, transforms, and the polygon exchange formats."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinkmorph.errors import (
    GeometryConflictError,
    ParameterDomainError,
    PolygonFormatError,
)
from shrinkmorph.geometry import (
    LotusSpec,
    PyramidCrossSpec,
    Polygon,
    SpoonSpec,
    StripSpec,
    AnnulusRimSpec,
    build_annulus_rim,
    build_lotus,
    build_pyramid_cross,
    build_spoon,
    build_strip,
    export_polygons,
    export_svg,
    import_polygons,
    points_in_region,
    reflect_layer,
    removed_fraction,
    ring_area,
    scale_layer_aspect,
    validate_layout,
)


def square(side=1.0, center=(0.0, 0.0)):
    h = side / 2.0
    cx, cy = center
    return np.array([[cx - h, cy - h], [cx + h, cy - h], [cx + h, cy + h], [cx - h, cy + h]])


class TestPolygonBasics:
    def test_shoelace_square(self):
        assert ring_area(square(2.0)) == pytest.approx(4.0)

    def test_make_normalizes_orientation(self):
        p = Polygon.make(square()[::-1])
        assert ring_area(p.outer) > 0

    def test_area_subtracts_holes(self):
        p = Polygon.make(square(4.0), holes=[square(1.0)])
        assert p.area() == pytest.approx(16.0 - 1.0)

    def test_points_in_region_with_hole(self):
        p = Polygon.make(square(4.0), holes=[square(1.0)])
        pts = np.array([[0.0, 0.0], [1.5, 0.0], [5.0, 0.0]])
        np.testing.assert_array_equal(points_in_region(pts, [p]), [False, True, False])


class TestLotus:
    def test_gamma_one_full_coverage(self):
        layout = build_lotus(LotusSpec(R=20.0, gamma=1.0))
        assert removed_fraction(layout) == pytest.approx(0.0, abs=1e-12)

    def test_paper_alpha_formula(self):
        # removed fraction = 0.5*(1 - gamma^2) at petal_fill = 0.5
        layout = build_lotus(LotusSpec(R=30.0, gamma=0.3, n_petals=8))
        assert removed_fraction(layout) == pytest.approx(0.455, abs=1e-3)

    def test_kirigami_area_shoelace_oracle(self):
        # covered fraction is 0.5*(1+gamma^2), so area = 0.5*pi*R^2*(1+gamma^2);
        # inscribed-polygon deficit stays below the 0.5% polygonization budget
        R, g = 30.0, 0.6
        layout = build_lotus(LotusSpec(R=R, gamma=g, n_petals=8))
        expect = 0.5 * math.pi * R * R * (1.0 + g * g)
        assert layout.layer_area("kirigami") == pytest.approx(expect, rel=5e-3)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterDomainError):
            LotusSpec(R=30.0, gamma=0.0)
        with pytest.raises(ParameterDomainError):
            LotusSpec(R=30.0, gamma=0.5, n_petals=0)
        with pytest.raises(ParameterDomainError):
            LotusSpec(R=-1.0, gamma=0.5)

    def test_layout_invariants(self):
        layout = build_lotus(LotusSpec(R=30.0, gamma=0.6, n_petals=8))
        assert validate_layout(layout) == []

    @given(
        gamma=st.floats(0.05, 1.0),
        n_petals=st.integers(3, 16),
    )
    @settings(max_examples=25, deadline=None)
    def test_alpha_formula_property(self, gamma, n_petals):
        layout = build_lotus(LotusSpec(R=25.0, gamma=gamma, n_petals=n_petals))
        expect = 0.5 * (1.0 - gamma * gamma)
        assert removed_fraction(layout) == pytest.approx(expect, abs=1e-3)

    def test_rotation_invariance_of_removed_fraction(self):
        layout = build_lotus(LotusSpec(R=25.0, gamma=0.45, n_petals=6))
        a0 = removed_fraction(layout)
        rot = [
            (name, [p.rotated(0.7) for p in polys]) for name, polys in layout.layers
        ]
        rotated = type(layout)(rot, [p.rotated(0.7) for p in layout.footprint])
        assert removed_fraction(rotated) == pytest.approx(a0, rel=1e-12)


class TestStrip:
    def test_zero_margin_identical_layers(self):
        layout = build_strip(StripSpec(60.0, 10.0), kirigami_margin=0.0)
        np.testing.assert_allclose(
            layout.layer("substrate")[0].outer, layout.layer("kirigami")[0].outer
        )

    def test_margin_area(self):
        layout = build_strip(StripSpec(60.0, 10.0), kirigami_margin=2.0)
        assert layout.layer_area("kirigami") == pytest.approx(360.0)

    def test_margin_too_large(self):
        with pytest.raises(ParameterDomainError):
            build_strip(StripSpec(60.0, 10.0), kirigami_margin=5.0)


class TestOtherBuilders:
    def test_pyramid_valid(self):
        layout = build_pyramid_cross(PyramidCrossSpec(R=25.0, arm_width=4.0, n_arms=4))
        assert validate_layout(layout) == []
        assert 0.0 < removed_fraction(layout) < 1.0

    def test_pyramid_arms_too_wide(self):
        with pytest.raises(ParameterDomainError):
            PyramidCrossSpec(R=10.0, arm_width=25.0, n_arms=4)

    def test_annulus_rim_valid(self):
        layout = build_annulus_rim(AnnulusRimSpec(R=30.0, r_inner=18.0, n_petals=8))
        assert validate_layout(layout) == []
        assert layout.layer_names() == ["substrate", "kirigami", "rim"]

    def test_spoon_valid(self):
        layout = build_spoon(SpoonSpec(R=15.0, gamma=0.5, handle_length=30.0,
                                       handle_width=8.0, kirigami_margin=1.5))
        assert validate_layout(layout) == []
        assert layout.layer_names() == ["substrate", "kirigami", "handle"]


class TestTransforms:
    def test_reflect_symmetric_fixed_point(self):
        layout = build_strip(StripSpec(10.0, 4.0), kirigami_margin=1.0)
        reflected = reflect_layer(layout, "kirigami", "x")
        a = layout.layer("kirigami")[0]
        b = reflected.layer("kirigami")[0]
        assert b.area() == pytest.approx(a.area(), rel=1e-12)
        # same vertex set up to ordering
        assert set(map(tuple, np.round(a.outer, 12))) == set(
            map(tuple, np.round(b.outer, 12))
        )

    def test_reflect_is_involution(self):
        layout = build_lotus(LotusSpec(R=10.0, gamma=0.5, n_petals=5))
        once = reflect_layer(layout, "kirigami", "y", selection=[1, 2])
        twice = reflect_layer(once, "kirigami", "y", selection=[1, 2])
        for p0, p1 in zip(layout.layer("kirigami"), twice.layer("kirigami")):
            assert set(map(tuple, np.round(p0.outer, 9))) == set(
                map(tuple, np.round(p1.outer, 9))
            )

    def _four_lobe_flower(self):
        # upper lobes on an outer radial band, lower lobes on an inner band,
        # so mirroring the upper pair lands in free space (butterfly-style)
        from shrinkmorph.geometry import PlanarLayout, arc_points

        def lobe(r0, r1, a0, a1):
            outer = arc_points(r1, a0, a1, 0.05)
            inner = arc_points(r0, a0, a1, 0.05)[::-1]
            return Polygon.make(np.vstack([outer, inner]))

        d = math.radians
        lobes = [
            lobe(6.0, 9.0, d(40), d(70)),
            lobe(6.0, 9.0, d(110), d(140)),
            lobe(2.0, 4.5, d(220), d(250)),
            lobe(2.0, 4.5, d(290), d(320)),
        ]
        from shrinkmorph.geometry import circle_ring

        disk = Polygon.make(circle_ring(10.0, 0.05))
        return PlanarLayout(
            layers=[("substrate", [disk]), ("kirigami", lobes)],
            footprint=[Polygon.make(disk.outer.copy())],
        )

    def test_reflect_upper_lobes_makes_bilateral_layout(self):
        layout = self._four_lobe_flower()
        total = layout.layer_area("kirigami")
        reflected = reflect_layer(layout, "kirigami", "x", selection=[0, 1])
        assert validate_layout(reflected) == []
        assert reflected.layer_area("kirigami") == pytest.approx(total, rel=1e-12)
        for p0, p1 in zip(layout.layer("kirigami"), reflected.layer("kirigami")):
            assert abs(p1.area()) == pytest.approx(abs(p0.area()), rel=1e-12)
        # all four lobes now sit below the x-axis: bilateral about y
        for p in reflected.layer("kirigami"):
            assert p.outer[:, 1].max() < 0

    def test_scale_two_lobes_along_y(self):
        layout = self._four_lobe_flower()
        stretched = scale_layer_aspect(
            layout, "kirigami", [2, 3], 1.0, 1.5, anchor=(0.0, 0.0)
        )
        assert validate_layout(stretched) == []
        for i in (2, 3):
            assert stretched.layer("kirigami")[i].area() == pytest.approx(
                1.5 * layout.layer("kirigami")[i].area(), rel=1e-12
            )

    def test_reflect_overlap_raises(self):
        # two stacked squares; reflecting the upper about x lands on the lower
        top = Polygon.make(square(2.0, center=(0.0, 2.0)))
        bottom = Polygon.make(square(2.0, center=(0.0, -2.0)))
        fp = Polygon.make(square(10.0))
        layout = type(build_strip(StripSpec(1, 1)))(
            layers=[("substrate", [fp]), ("kirigami", [top, bottom])],
            footprint=[Polygon.make(square(10.0))],
        )
        with pytest.raises(GeometryConflictError):
            reflect_layer(layout, "kirigami", "x", selection=[0])

    def test_scale_identity(self):
        layout = build_lotus(LotusSpec(R=10.0, gamma=0.5))
        scaled = scale_layer_aspect(layout, "kirigami", [0], 1.0, 1.0)
        np.testing.assert_allclose(
            scaled.layer("kirigami")[0].outer, layout.layer("kirigami")[0].outer
        )

    def test_scale_area_multiplier(self):
        sq = Polygon.make(square(10.0))
        layout = type(build_strip(StripSpec(1, 1)))(
            layers=[("substrate", [Polygon.make(square(40.0))]), ("kirigami", [sq])],
            footprint=[Polygon.make(square(40.0))],
        )
        scaled = scale_layer_aspect(layout, "kirigami", [0], 1.0, 2.0, anchor=(0, 0))
        assert scaled.layer("kirigami")[0].area() == pytest.approx(200.0)
        hi = scaled.layer("kirigami")[0].outer[:, 1].max()
        assert hi == pytest.approx(10.0)

    def test_scale_escape_raises(self):
        layout = build_strip(StripSpec(10.0, 4.0), kirigami_margin=0.5)
        with pytest.raises(GeometryConflictError):
            scale_layer_aspect(layout, "kirigami", [0], 2.0, 1.0)

    def test_scale_bad_factor(self):
        layout = build_strip(StripSpec(10.0, 4.0))
        with pytest.raises(ParameterDomainError):
            scale_layer_aspect(layout, "kirigami", [0], 0.0, 1.0)


class TestPolygonFile:
    def test_round_trip(self, tmp_path):
        layout = build_lotus(LotusSpec(R=12.0, gamma=0.4, n_petals=5))
        path = tmp_path / "lotus.poly.txt"
        export_polygons(layout, path)
        back = import_polygons(path)
        assert back.layer_names() == layout.layer_names()
        for name in layout.layer_names():
            assert back.layer_area(name) == pytest.approx(
                layout.layer_area(name), rel=1e-9
            )

    def test_single_square(self, tmp_path):
        path = tmp_path / "sq.txt"
        path.write_text("LAYER substrate\nP 0 0 2 0 2 2 0 2\n")
        layout = import_polygons(path)
        assert len(layout.layer("substrate")) == 1
        assert not layout.normalized_on_import
        assert layout.layer_area("substrate") == pytest.approx(4.0)

    def test_cw_ring_normalized_with_flag(self, tmp_path):
        path = tmp_path / "cw.txt"
        path.write_text("LAYER substrate\nP 0 0 0 2 2 2 2 0\n")
        layout = import_polygons(path)
        assert layout.normalized_on_import
        assert layout.layer_area("substrate") == pytest.approx(4.0)

    def test_figure_eight_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("LAYER substrate\nP 0 0 2 2 2 0 0 2\n")
        with pytest.raises(PolygonFormatError, match="line 2"):
            import_polygons(path)

    def test_comments_and_holes(self, tmp_path):
        path = tmp_path / "holey.txt"
        path.write_text(
            "# a square with a hole\n"
            "LAYER substrate\n"
            "P 0 0 4 0 4 4 0 4\n"
            "H 1 1 3 1 3 3 1 3  # hole\n"
        )
        layout = import_polygons(path)
        assert layout.layer_area("substrate") == pytest.approx(12.0)

    def test_svg_export(self, tmp_path):
        layout = build_lotus(LotusSpec(R=12.0, gamma=0.4))
        path = tmp_path / "lotus.svg"
        export_svg(layout, path)
        text = path.read_text()
        assert text.startswith("<?xml") and "<svg" in text and "path" in text
