"""Mesh I/O and normalization contracts."""

import numpy as np
import pytest

from motion4d.geometry import (
    GeometryError,
    Mesh,
    MeshIOError,
    SimilarityTransform,
    load_mesh,
    load_obj,
    load_ply,
    normalize_to_cube,
    save_obj,
    save_ply,
)

TETRA_OBJ = """\
# unit tetrahedron
v 0 0 0
v 1 0 0
v 0 1 0
v 0 0 1
f 1 2 3
f 1 2 4
f 1 3 4
f 2 3 4
"""


def random_mesh(rng, v=20, f=30):
    verts = rng.normal(size=(v, 3)) * rng.uniform(0.5, 3.0)
    faces = rng.integers(0, v, size=(f, 3))
    ok = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    return Mesh(verts, faces[ok], rng.uniform(0, 1, size=(v, 3)))


class TestObj:
    def test_unit_tetrahedron(self, tmp_path):
        p = tmp_path / "tet.obj"
        p.write_text(TETRA_OBJ)
        mesh = load_mesh(p)
        assert mesh.num_vertices == 4
        assert mesh.num_faces == 4
        assert np.allclose(mesh.vertex_colors, 0.5)  # no colors -> gray

    def test_xyzrgb_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        mesh = random_mesh(rng)
        p = tmp_path / "colored.obj"
        save_obj(p, mesh)
        back = load_obj(p)
        assert back.num_vertices == mesh.num_vertices
        assert np.allclose(back.vertices, mesh.vertices, atol=1e-6)
        assert np.allclose(back.vertex_colors, mesh.vertex_colors, atol=1e-5)

    def test_slash_faces_and_quads(self, tmp_path):
        p = tmp_path / "quad.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n")
        mesh = load_obj(p)
        assert mesh.num_faces == 2  # fan triangulation

    def test_degenerate_faces_dropped(self, tmp_path):
        p = tmp_path / "degen.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nf 1 1 2\n")
        mesh = load_obj(p)
        assert mesh.num_faces == 1

    def test_parse_failure(self, tmp_path):
        p = tmp_path / "bad.obj"
        p.write_text("v 1 2\n")
        with pytest.raises(MeshIOError):
            load_obj(p)


class TestPly:
    def test_uchar_colors_scaled(self, tmp_path):
        mesh = Mesh(
            np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float),
            np.array([[0, 1, 2]]),
            np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),
        )
        p = tmp_path / "tri.ply"
        save_ply(p, mesh)
        back = load_ply(p)
        # uchar channel: 255 -> 1.0, 0 -> 0.0
        assert np.allclose(back.vertex_colors, mesh.vertex_colors, atol=1 / 255.0)
        assert back.num_faces == 1

    def test_vertices_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        mesh = random_mesh(rng)
        p = tmp_path / "m.ply"
        save_ply(p, mesh)
        back = load_ply(p)
        assert np.allclose(back.vertices, mesh.vertices, atol=1e-6)
        assert back.num_faces == mesh.num_faces

    def test_non_ply_rejected(self, tmp_path):
        p = tmp_path / "x.ply"
        p.write_bytes(b"not a ply at all")
        with pytest.raises(MeshIOError):
            load_ply(p)


class TestNormalizeToCube:
    def test_unit_cube_from_double_cube(self):
        corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
        mesh = Mesh(corners, np.array([[0, 1, 2]]))
        out, transform = normalize_to_cube(mesh)
        assert np.allclose(out.vertices.min(axis=0), -0.5)
        assert np.allclose(out.vertices.max(axis=0), 0.5)
        assert transform.scale == pytest.approx(0.5)

    def test_zero_extent_rejected(self):
        mesh = Mesh(np.ones((4, 3)), np.array([[0, 1, 2]]))
        with pytest.raises(GeometryError):
            normalize_to_cube(mesh)

    def test_random_mesh_postconditions(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            mesh = random_mesh(rng)
            out, transform = normalize_to_cube(mesh)
            lo, hi = out.vertices.min(axis=0), out.vertices.max(axis=0)
            assert abs(float((hi - lo).max()) - 1.0) < 1e-6
            assert np.all(np.abs((hi + lo) / 2) < 1e-6)
            # inverse reproduces input
            back = transform.inverse().apply(out.vertices)
            assert np.max(np.abs(back - mesh.vertices)) < 1e-5


class TestSimilarityTransform:
    def test_identity(self):
        t = SimilarityTransform.identity()
        pts = np.random.default_rng(0).normal(size=(10, 3))
        assert np.allclose(t.apply(pts), pts)

    def test_inverse_composes_to_identity(self):
        rng = np.random.default_rng(3)
        theta = 0.7
        rot = np.array([
            [np.cos(theta), -np.sin(theta), 0],
            [np.sin(theta), np.cos(theta), 0],
            [0, 0, 1.0],
        ])
        t = SimilarityTransform(rot, 1.7, rng.normal(size=3))
        pts = rng.normal(size=(20, 3))
        assert np.max(np.abs(t.inverse().apply(t.apply(pts)) - pts)) < 1e-10

    def test_bad_rotation_rejected(self):
        with pytest.raises(GeometryError):
            SimilarityTransform(np.eye(3) * 2.0, 1.0, np.zeros(3))


def test_vertex_normals_unit_length():
    rng = np.random.default_rng(4)
    mesh = random_mesh(rng)
    if mesh.num_faces:
        n = mesh.vertex_normals()
        assert np.allclose(np.linalg.norm(n, axis=1), 1.0, atol=1e-6)


def test_point_set_ply_export(tmp_path):
    from motion4d.geometry import save_point_ply
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(40, 3))
    cols = rng.uniform(0, 1, size=(40, 3))
    p = tmp_path / "points.ply"
    save_point_ply(p, pts, cols)
    back = load_ply(p)
    assert back.num_vertices == 40
    assert back.num_faces == 0
    assert np.allclose(back.vertices, pts, atol=1e-6)
    assert np.allclose(back.vertex_colors, cols, atol=1 / 255.0)
