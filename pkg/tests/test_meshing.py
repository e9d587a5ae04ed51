"""Triangulation, extrusion, and the independent mesh audits."""

import math

import numpy as np
import pytest

from shrinkmorph.errors import MeshingError
from shrinkmorph.geometry import (
    LotusSpec,
    Polygon,
    SpoonSpec,
    StripSpec,
    build_lotus,
    build_spoon,
    build_strip,
    circle_ring,
    PlanarLayout,
)
from shrinkmorph.meshing import (
    LayerStackEntry,
    TriMesh2D,
    extrude,
    mesh_report,
    triangulate,
)
from shrinkmorph.meshing.validate import audit_layered_mesh, audit_trimesh


def unit_square_layout():
    sq = Polygon.make(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    return PlanarLayout(
        layers=[("substrate", [sq])],
        footprint=[Polygon.make(sq.outer.copy())],
    )


def single_triangle_mesh(cover_mask=0b11):
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2]])
    return TriMesh2D(
        nodes=nodes,
        triangles=tris,
        coverage=np.array([cover_mask], dtype=np.uint32),
        layer_names=["substrate", "kirigami"],
        boundary_edges=np.array([[0, 1], [1, 2], [2, 0]]),
        h_target=1.0,
        min_angle=20.0,
    )


class TestTriangulate:
    def test_unit_square_area_sum(self):
        mesh = triangulate(unit_square_layout(), h_target=0.5)
        assert mesh.triangle_areas().sum() == pytest.approx(1.0, abs=1e-9)
        assert audit_trimesh(mesh) == []

    def test_disk_passes_audit(self):
        layout = build_lotus(LotusSpec(R=30.0, gamma=1.0))
        mesh = triangulate(layout, h_target=1.5)
        assert audit_trimesh(mesh) == []
        # disk area to polygonization accuracy
        assert mesh.triangle_areas().sum() == pytest.approx(
            math.pi * 900.0, rel=5e-3
        )

    def test_lotus_coverage_tags(self):
        spec = LotusSpec(R=20.0, gamma=0.5, n_petals=6)
        layout = build_lotus(spec)
        mesh = triangulate(layout, h_target=2.0)
        assert audit_trimesh(mesh) == []
        centroids = mesh.nodes[mesh.triangles].mean(axis=1)
        r = np.linalg.norm(centroids, axis=1)
        inner = r < 0.5 * 20.0 - 1e-6
        # every triangle strictly inside gamma*R is tagged substrate + kirigami
        both = mesh.covered("substrate") & mesh.covered("kirigami")
        assert np.all(both[inner])
        # substrate covers everything
        assert np.all(mesh.covered("substrate"))

    def test_coverage_area_close_to_polygon_area(self):
        spec = LotusSpec(R=20.0, gamma=0.5, n_petals=6)
        layout = build_lotus(spec)
        mesh = triangulate(layout, h_target=1.2)
        areas = mesh.triangle_areas()
        a_kir = areas[mesh.covered("kirigami")].sum()
        assert a_kir == pytest.approx(layout.layer_area("kirigami"), rel=2e-2)

    def test_min_angle_respected_on_disk(self):
        layout = build_lotus(LotusSpec(R=30.0, gamma=0.6, n_petals=8))
        mesh = triangulate(layout, h_target=1.5, min_angle=20.0)
        from shrinkmorph.meshing.triangulate import _tri_quality

        _, _, angles, _, _ = _tri_quality(mesh.nodes, mesh.triangles)
        assert angles.min() >= 20.0 - 1e-9
        assert mesh.warnings == []

    def test_refinement_convergence_of_coverage(self):
        # halving h changes the covered-area estimate by under 2%
        layout = build_lotus(LotusSpec(R=15.0, gamma=0.5, n_petals=8))
        est = []
        for h in (2.0, 1.0):
            mesh = triangulate(layout, h_target=h)
            areas = mesh.triangle_areas()
            est.append(1.0 - areas[mesh.covered("kirigami")].sum() / areas.sum())
        assert abs(est[1] - est[0]) <= 0.02

    def test_determinism(self):
        layout = build_lotus(LotusSpec(R=12.0, gamma=0.4, n_petals=5))
        m1 = triangulate(layout, h_target=1.0)
        m2 = triangulate(layout, h_target=1.0)
        np.testing.assert_array_equal(m1.triangles, m2.triangles)
        assert m1.nodes.tobytes() == m2.nodes.tobytes()

    def test_spoon_crossing_constraints(self):
        # keyhole kirigami crosses the bowl rim: crossings must be resolved
        layout = build_spoon(SpoonSpec(R=12.0, gamma=0.5, handle_length=20.0,
                                       handle_width=8.0, kirigami_margin=1.5))
        mesh = triangulate(layout, h_target=1.5)
        assert audit_trimesh(mesh) == []
        assert np.any(mesh.covered("kirigami"))
        assert np.any(mesh.covered("handle"))

    def test_strip_mesh(self):
        layout = build_strip(StripSpec(20.0, 5.0), kirigami_margin=1.0)
        mesh = triangulate(layout, h_target=1.0)
        assert audit_trimesh(mesh) == []
        assert mesh.triangle_areas().sum() == pytest.approx(100.0, abs=1e-9)


class TestExtrude:
    def test_two_full_layers_node_count(self):
        mesh2d = single_triangle_mesh(0b11)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
        ]
        mesh = extrude(mesh2d, stack)
        assert len(mesh.elements) == 2
        assert len(mesh.nodes) == 9  # 3 shared at the interface
        assert audit_layered_mesh(mesh) == []

    def test_substrate_only_triangle(self):
        mesh2d = single_triangle_mesh(0b01)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
        ]
        mesh = extrude(mesh2d, stack)
        assert len(mesh.elements) == 1
        assert len(mesh.nodes) == 6

    def test_unknown_layer_raises(self):
        mesh2d = single_triangle_mesh()
        with pytest.raises(MeshingError):
            extrude(mesh2d, [LayerStackEntry("nope", 1.0, "s")])

    def test_element_counts_match_coverage(self):
        layout = build_lotus(LotusSpec(R=15.0, gamma=0.5, n_petals=8))
        mesh2d = triangulate(layout, h_target=1.5)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
        ]
        mesh = extrude(mesh2d, stack)
        n_sub = int(np.sum(mesh2d.covered("substrate")))
        n_kir = int(np.sum(mesh2d.covered("kirigami")))
        assert np.sum(mesh.element_layer == 0) == n_sub
        assert np.sum(mesh.element_layer == 1) == n_kir
        assert audit_layered_mesh(mesh) == []

    def test_subdivided_layer(self):
        mesh2d = single_triangle_mesh(0b01)
        mesh = extrude(mesh2d, [LayerStackEntry("substrate", 0.3, "s", subdivisions=3)])
        assert len(mesh.elements) == 3
        assert len(mesh.nodes) == 12
        np.testing.assert_allclose(
            np.unique(mesh.nodes[:, 2]), [0.0, 0.1, 0.2, 0.3], atol=1e-12
        )

    def test_report_counts_and_volume(self):
        mesh2d = single_triangle_mesh(0b11)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
        ]
        rep = mesh_report(extrude(mesh2d, stack))
        assert rep.n_elements == 2
        assert rep.n_nodes == 9
        assert rep.min_volume > 0
        assert rep.layer_volume["substrate"] == pytest.approx(0.5 * 0.1, rel=1e-12)

    def test_lotus_substrate_volume_oracle(self):
        layout = build_lotus(LotusSpec(R=30.0, gamma=0.5, n_petals=8))
        mesh2d = triangulate(layout, h_target=2.0)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
        ]
        rep = mesh_report(extrude(mesh2d, stack))
        assert rep.layer_volume["substrate"] == pytest.approx(
            math.pi * 900.0 * 0.1, rel=5e-3
        )

    def test_trilayer_spoon_extrusion(self):
        layout = build_spoon(SpoonSpec(R=12.0, gamma=0.5, handle_length=20.0,
                                       handle_width=8.0, kirigami_margin=1.5))
        mesh2d = triangulate(layout, h_target=1.5)
        stack = [
            LayerStackEntry("substrate", 0.1, "s"),
            LayerStackEntry("kirigami", 1.8, "k"),
            LayerStackEntry("handle", 0.1, "s"),
        ]
        mesh = extrude(mesh2d, stack)
        assert audit_layered_mesh(mesh) == []
