"""Procedural colored meshes used by the data generator: subdivided box,
cylinder, icosphere, and an articulated two-box creature. Vertex colors are
position gradients so appearance carries information."""

from __future__ import annotations

import numpy as np

from ..geometry import Mesh


def _position_colors(vertices: np.ndarray) -> np.ndarray:
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    span = np.where(hi - lo > 1e-12, hi - lo, 1.0)
    return 0.15 + 0.7 * (vertices - lo) / span


def box(extents=(0.8, 0.5, 0.3), divisions: int = 6) -> Mesh:
    """Axis-aligned box with each face subdivided into a divisions^2 grid."""
    ex, ey, ez = extents
    verts: list[np.ndarray] = []
    faces: list[list[int]] = []

    def add_face(origin, du, dv):
        base = len(verts)
        n = divisions
        for i in range(n + 1):
            for j in range(n + 1):
                verts.append(origin + du * (i / n) + dv * (j / n))
        for i in range(n):
            for j in range(n):
                a = base + i * (n + 1) + j
                b = a + 1
                c = a + (n + 1)
                d = c + 1
                faces.append([a, b, d])
                faces.append([a, d, c])

    o = np.array([-ex, -ey, -ez])
    dx = np.array([2 * ex, 0, 0])
    dy = np.array([0, 2 * ey, 0])
    dz = np.array([0, 0, 2 * ez])
    add_face(o, dy, dx)            # z = -ez
    add_face(o + dz, dx, dy)       # z = +ez
    add_face(o, dx, dz)            # y = -ey
    add_face(o + dy, dz, dx)       # y = +ey
    add_face(o, dz, dy)            # x = -ex
    add_face(o + dx, dy, dz)       # x = +ex
    v = np.array(verts)
    return Mesh(v, np.array(faces), _position_colors(v))


def cylinder(radius: float = 0.3, height: float = 1.0, segments: int = 24,
             rings: int = 8) -> Mesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    for r in range(rings + 1):
        z = -height / 2 + height * r / rings
        for s in range(segments):
            a = 2 * np.pi * s / segments
            verts.append([radius * np.cos(a), radius * np.sin(a), z])
    for r in range(rings):
        for s in range(segments):
            a = r * segments + s
            b = r * segments + (s + 1) % segments
            c = a + segments
            d = b + segments
            faces.append([a, b, d])
            faces.append([a, d, c])
    bot = len(verts)
    verts.append([0.0, 0.0, -height / 2])
    top = len(verts)
    verts.append([0.0, 0.0, height / 2])
    for s in range(segments):
        faces.append([bot, (s + 1) % segments, s])
        base = rings * segments
        faces.append([top, base + s, base + (s + 1) % segments])
    v = np.array(verts)
    return Mesh(v, np.array(faces), _position_colors(v))


def icosphere(radius: float = 0.5, subdivisions: int = 2) -> Mesh:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ]
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = [np.array(v, dtype=np.float64) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}
        new_faces = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                cache[key] = len(verts)
                verts.append((verts[i] + verts[j]) / 2.0)
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new_faces
    v = np.array(verts)
    v = v / np.linalg.norm(v, axis=1, keepdims=True) * radius
    return Mesh(v, np.array(faces), _position_colors(v))


def creature(divisions: int = 5) -> Mesh:
    """Body box plus an offset head box: articulated, clearly anisotropic."""
    body = box((0.55, 0.28, 0.22), divisions)
    head = box((0.18, 0.16, 0.15), max(3, divisions - 2))
    head_verts = head.vertices + np.array([0.62, 0.22, 0.0])
    verts = np.vstack([body.vertices, head_verts])
    faces = np.vstack([body.faces, head.faces + body.num_vertices])
    return Mesh(verts, faces, _position_colors(verts))


PRIMITIVES = {
    "box": box,
    "cylinder": cylinder,
    "sphere": icosphere,
    "creature": creature,
}
