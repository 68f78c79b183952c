import json

import numpy as np
import pytest

from tidg.errors import InvalidDimensionsError, UncoveredBoundaryEdgeError
from tidg.mesh import EdgeTag, Mesh, classify_edges, cook_mesh, rect_mesh


class TestRectMesh:
    def test_unit_square_single_cell(self):
        mesh = rect_mesh(1.0, 1.0, 1, 1)
        assert mesh.n_vertices == 4
        assert mesh.n_triangles == 2
        assert mesh.n_edges == 5
        assert len(mesh.interior_edges) == 1

    def test_counts_beam_mesh(self):
        mesh = rect_mesh(10.0, 2.0, 80, 16, origin_y=-1.0)
        assert mesh.n_triangles == 2 * 80 * 16
        assert mesh.n_vertices == 81 * 17
        assert mesh.vertices[:, 1].min() == -1.0
        assert mesh.vertices[:, 1].max() == 1.0

    def test_euler_characteristic(self):
        mesh = rect_mesh(1.0, 1.0, 2, 2)
        assert mesh.n_vertices - mesh.n_edges + mesh.n_triangles == 1

    def test_total_area(self):
        mesh = rect_mesh(3.0, 2.0, 5, 4)
        assert mesh.areas.sum() == pytest.approx(6.0, rel=1e-12)

    def test_rejects_bad_dimensions(self):
        with pytest.raises(InvalidDimensionsError):
            rect_mesh(-1.0, 1.0, 2, 2)
        with pytest.raises(InvalidDimensionsError):
            rect_mesh(1.0, 1.0, 0, 2)

    def test_h_halves_under_refinement(self):
        h1 = rect_mesh(1.0, 1.0, 4, 4).h
        h2 = rect_mesh(1.0, 1.0, 8, 8).h
        assert h1 / h2 == pytest.approx(2.0, rel=0.01)


class TestCookMesh:
    def test_single_cell(self):
        mesh = cook_mesh(1)
        assert mesh.n_triangles == 2
        corners = {tuple(v) for v in mesh.vertices}
        assert corners == {(0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0)}

    def test_element_count_convention(self):
        assert cook_mesh(32).n_triangles == 2048

    def test_orientation_across_refinements(self):
        for n in (1, 2, 4, 8, 16, 32):
            mesh = cook_mesh(n)
            assert np.all(mesh.areas > 0.0)

    def test_total_area_is_trapezoid_area(self):
        # heights 44 (left) and 16 (right) over width 48
        expected = 0.5 * (44.0 + 16.0) * 48.0
        for n in (1, 4, 16):
            assert cook_mesh(n).areas.sum() == pytest.approx(expected, rel=1e-12)

    def test_boundary_tags(self):
        mesh = cook_mesh(4)
        left = mesh.dirichlet_edges
        assert len(left) == 4
        assert np.all(np.abs(mesh.edge_midpoint[left, 0]) < 1e-12)
        assert len(mesh.neumann_edges) == 3 * 4


class TestEdgeConnectivity:
    def test_interior_edges_shared_by_two_triangles(self):
        mesh = rect_mesh(1.0, 1.0, 3, 3)
        for e in mesh.interior_edges:
            assert mesh.edge_neighbor[e] >= 0
            assert mesh.edge_owner[e] < mesh.edge_neighbor[e]
        for e in mesh.boundary_edges:
            assert mesh.edge_neighbor[e] == -1

    def test_owner_and_neighbor_contain_endpoints(self):
        mesh = rect_mesh(2.0, 1.0, 3, 2)
        for e in range(mesh.n_edges):
            va, vb = mesh.edge_vertices[e]
            tri = mesh.triangles[mesh.edge_owner[e]]
            assert va in tri and vb in tri
            slots = mesh.edge_owner_slots[e]
            assert tri[slots[0]] == va and tri[slots[1]] == vb
            if mesh.edge_neighbor[e] >= 0:
                tri2 = mesh.triangles[mesh.edge_neighbor[e]]
                assert va in tri2 and vb in tri2

    def test_normals_unit_and_outward(self):
        mesh = cook_mesh(3)
        norms = np.linalg.norm(mesh.edge_normal, axis=1)
        assert np.abs(norms - 1.0).max() < 1e-14
        for e in range(mesh.n_edges):
            own = mesh.edge_owner[e]
            centroid = mesh.vertices[mesh.triangles[own]].mean(axis=0)
            outward = mesh.edge_midpoint[e] - centroid
            assert outward @ mesh.edge_normal[e] > 0.0

    def test_edge_lengths_and_midpoints(self):
        mesh = rect_mesh(1.0, 1.0, 2, 2)
        for e in range(mesh.n_edges):
            va, vb = mesh.edge_vertices[e]
            d = mesh.vertices[vb] - mesh.vertices[va]
            assert mesh.edge_length[e] == pytest.approx(np.linalg.norm(d))
            mid = 0.5 * (mesh.vertices[va] + mesh.vertices[vb])
            assert np.abs(mesh.edge_midpoint[e] - mid).max() < 1e-15

    def test_triangle_edges_are_opposite_vertices(self):
        mesh = rect_mesh(1.0, 2.0, 2, 3)
        for t in range(mesh.n_triangles):
            for k in range(3):
                e = mesh.triangle_edges[t, k]
                assert mesh.triangles[t, k] not in mesh.edge_vertices[e]

    def test_rejects_flipped_triangle(self):
        with pytest.raises(ValueError, match="area"):
            Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
                 np.array([[0, 2, 1]]))


class TestClassifyEdges:
    def test_dirichlet_on_left(self):
        mesh = classify_edges(rect_mesh(1.0, 1.0, 1, 1),
                              dirichlet=lambda x: x[0] < 1e-12,
                              neumann=lambda x: True)
        assert len(mesh.dirichlet_edges) == 1
        assert len(mesh.neumann_edges) == 3

    def test_beam_style_classification(self):
        ny = 4
        mesh = classify_edges(rect_mesh(10.0, 2.0, 8, ny, origin_y=-1.0),
                              dirichlet=lambda x: x[0] < 1e-9,
                              neumann=lambda x: True)
        assert len(mesh.dirichlet_edges) == ny

    def test_normal_datum_tag(self):
        mesh = classify_edges(rect_mesh(1.0, 1.0, 2, 2),
                              dirichlet_normal=lambda x: x[0] < 1e-12,
                              neumann=lambda x: True)
        assert len(mesh.dirichlet_normal_edges) == 2
        assert set(mesh.flux_edges) >= set(mesh.dirichlet_normal_edges)

    def test_uncovered_edge_raises(self):
        with pytest.raises(UncoveredBoundaryEdgeError):
            classify_edges(rect_mesh(1.0, 1.0, 1, 1),
                           dirichlet=lambda x: False)

    def test_original_mesh_unchanged(self):
        mesh = rect_mesh(1.0, 1.0, 1, 1)
        classified = classify_edges(mesh, dirichlet=lambda x: True)
        assert np.all(mesh.edge_tag[mesh.boundary_edges] == EdgeTag.NEUMANN)
        assert np.all(classified.edge_tag[classified.boundary_edges]
                      == EdgeTag.DIRICHLET)


class TestSerialization:
    def test_json_round_trip_counts(self, tmp_path):
        mesh = rect_mesh(1.0, 1.0, 2, 1)
        path = tmp_path / "mesh.json"
        mesh.save_json(path)
        data = json.loads(path.read_text())
        assert len(data["vertices"]) == mesh.n_vertices
        assert len(data["triangles"]) == mesh.n_triangles
        assert len(data["edges"]) == mesh.n_edges
        assert data["edges"][0]["tag"] in {"INTERIOR", "NEUMANN"}

    def test_find_vertex(self):
        mesh = cook_mesh(2)
        vid = mesh.find_vertex((48.0, 60.0))
        assert np.abs(mesh.vertices[vid] - [48.0, 60.0]).max() < 1e-12
        with pytest.raises(ValueError):
            mesh.find_vertex((7.7, 7.7))
