"""Triangle meshes: OBJ/PLY I/O, cleanup, cube normalization, vertex normals.

OBJ supports the xyzrgb vertex-color extension; PLY is binary little-endian
with optional uchar red/green/blue. Missing colors default to 0.5 gray and
degenerate faces (area <= 1e-12) are dropped at load time.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GeometryError(ValueError):
    pass


class MeshIOError(GeometryError):
    pass


DEGENERATE_AREA = 1e-12


@dataclass
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray
    vertex_colors: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.vertex_colors is None:
            self.vertex_colors = np.full((len(self.vertices), 3), 0.5)
        self.vertex_colors = np.ascontiguousarray(self.vertex_colors, dtype=np.float64).reshape(-1, 3)
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise GeometryError("face index out of range")
        if self.faces.size and self.faces.min() < 0:
            raise GeometryError("negative face index")

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def copy(self) -> "Mesh":
        return Mesh(self.vertices.copy(), self.faces.copy(), self.vertex_colors.copy())

    def face_areas(self) -> np.ndarray:
        v = self.vertices
        f = self.faces
        cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def drop_degenerate_faces(self) -> "Mesh":
        keep = self.face_areas() > DEGENERATE_AREA
        self.faces = self.faces[keep]
        return self

    def vertex_normals(self) -> np.ndarray:
        """Area-weighted face-normal accumulation, renormalized per vertex."""
        v, f = self.vertices, self.faces
        fn = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])  # length = 2*area
        normals = np.zeros_like(v)
        for k in range(3):
            np.add.at(normals, f[:, k], fn)
        norms = np.linalg.norm(normals, axis=1, keepdims=True)
        zero = norms[:, 0] < 1e-20
        normals[zero] = (0.0, 0.0, 1.0)
        norms[zero] = 1.0
        return normals / norms


@dataclass
class SimilarityTransform:
    """p -> scale * rotation @ p + translation."""

    rotation: np.ndarray
    scale: float
    translation: np.ndarray

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.scale = float(self.scale)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if self.scale <= 0:
            raise GeometryError("scale must be positive")
        if not np.allclose(self.rotation.T @ self.rotation, np.eye(3), atol=1e-6):
            raise GeometryError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(self.rotation), 1.0, atol=1e-6):
            raise GeometryError("rotation determinant is not +1")

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(np.eye(3), 1.0, np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ (self.scale * self.rotation).T + self.translation

    def inverse(self) -> "SimilarityTransform":
        inv_scale = 1.0 / self.scale
        rot_t = self.rotation.T
        return SimilarityTransform(rot_t, inv_scale, -inv_scale * (rot_t @ self.translation))

    def compose(self, first: "SimilarityTransform") -> "SimilarityTransform":
        """Transform equal to applying `first`, then self."""
        return SimilarityTransform(
            self.rotation @ first.rotation,
            self.scale * first.scale,
            self.scale * self.rotation @ first.translation + self.translation,
        )

    def to_dict(self) -> dict:
        return {
            "rotation": self.rotation.tolist(),
            "scale": self.scale,
            "translation": self.translation.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimilarityTransform":
        return cls(np.array(d["rotation"]), d["scale"], np.array(d["translation"]))


def normalize_to_cube(mesh: Mesh) -> tuple[Mesh, SimilarityTransform]:
    """Uniformly scale + translate so the bounding box is centered at the
    origin with longest extent exactly 1.0; returns (mesh, applied transform)."""
    if mesh.num_vertices < 1:
        raise GeometryError("empty mesh")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    extent = float((hi - lo).max())
    if extent <= 0.0:
        raise GeometryError("zero-extent mesh cannot be normalized")
    scale = 1.0 / extent
    center = (lo + hi) / 2.0
    transform = SimilarityTransform(np.eye(3), scale, -scale * center)
    out = Mesh(transform.apply(mesh.vertices), mesh.faces.copy(), mesh.vertex_colors.copy())
    return out, transform


# -- OBJ ----------------------------------------------------------------------


def load_obj(path) -> Mesh:
    verts: list[list[float]] = []
    colors: list[list[float]] = []
    faces: list[list[int]] = []
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MeshIOError(f"cannot read {path}: {e}") from e
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            vals = [float(x) for x in parts[1:]]
            if len(vals) not in (3, 6):
                raise MeshIOError(f"{path}:{lineno}: vertex needs 3 or 6 floats")
            verts.append(vals[:3])
            colors.append(vals[3:6] if len(vals) == 6 else [0.5, 0.5, 0.5])
        elif parts[0] == "f":
            idx = []
            for token in parts[1:]:
                head = token.split("/")[0]
                i = int(head)
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) < 3:
                raise MeshIOError(f"{path}:{lineno}: face needs >= 3 vertices")
            for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                faces.append([idx[0], idx[k], idx[k + 1]])
    if not verts:
        raise MeshIOError(f"{path}: no vertices")
    mesh = Mesh(np.array(verts), np.array(faces, dtype=np.int64).reshape(-1, 3), np.array(colors))
    return mesh.drop_degenerate_faces()


def save_obj(path, mesh: Mesh, write_colors: bool = True):
    lines = []
    for i in range(mesh.num_vertices):
        x, y, z = mesh.vertices[i]
        if write_colors:
            r, g, b = mesh.vertex_colors[i]
            lines.append(f"v {x:.8g} {y:.8g} {z:.8g} {r:.6g} {g:.6g} {b:.6g}")
        else:
            lines.append(f"v {x:.8g} {y:.8g} {z:.8g}")
    for a, b, c in mesh.faces:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


# -- PLY (binary little-endian) ------------------------------------------------

_PLY_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4, "double": 8, "float64": 8,
}
_PLY_STRUCT = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def load_ply(path) -> Mesh:
    blob = Path(path).read_bytes()
    end = blob.find(b"end_header\n")
    if not blob.startswith(b"ply") or end < 0:
        raise MeshIOError(f"{path}: not a PLY file")
    header = blob[:end].decode("ascii", errors="replace").splitlines()
    body = blob[end + len(b"end_header\n"):]

    if not any("binary_little_endian" in line for line in header):
        raise MeshIOError(f"{path}: only binary little-endian PLY is supported")

    elements: list[tuple[str, int, list]] = []
    for line in header:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property" and elements:
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append(("scalar", parts[1], parts[2]))

    verts = colors = None
    faces: list[list[int]] = []
    off = 0
    for name, count, props in elements:
        if name == "vertex":
            fmt = "<" + "".join(_PLY_STRUCT[p[1]] for p in props)
            size = struct.calcsize(fmt)
            names = [p[2] for p in props]
            rows = [struct.unpack_from(fmt, body, off + i * size) for i in range(count)]
            off += count * size
            cols = dict(zip(names, zip(*rows))) if rows else {}
            try:
                verts = np.array([cols["x"], cols["y"], cols["z"]], dtype=np.float64).T
            except KeyError as e:
                raise MeshIOError(f"{path}: vertex element missing {e}") from e
            if "red" in cols:
                colors = np.array([cols["red"], cols["green"], cols["blue"]], dtype=np.float64).T / 255.0
        elif name == "face":
            for _ in range(count):
                spec = props[0]
                if spec[0] != "list":
                    raise MeshIOError(f"{path}: face element must be a list property")
                cfmt, ifmt = _PLY_STRUCT[spec[1]], _PLY_STRUCT[spec[2]]
                (cnt,) = struct.unpack_from("<" + cfmt, body, off)
                off += _PLY_SIZES[spec[1]]
                idx = struct.unpack_from(f"<{cnt}{ifmt}", body, off)
                off += cnt * _PLY_SIZES[spec[2]]
                for k in range(1, cnt - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
        else:
            row = sum(_PLY_SIZES[p[1]] for p in props if p[0] == "scalar")
            off += count * row
    if verts is None:
        raise MeshIOError(f"{path}: no vertex element")
    mesh = Mesh(verts, np.array(faces, dtype=np.int64).reshape(-1, 3), colors)
    return mesh.drop_degenerate_faces()


def save_ply(path, mesh: Mesh):
    v = mesh.vertices.astype("<f4")
    c = np.clip(np.round(mesh.vertex_colors * 255.0), 0, 255).astype(np.uint8)
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {mesh.num_vertices}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        f"element face {mesh.num_faces}\n"
        "property list uchar int vertex_indices\nend_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        for i in range(mesh.num_vertices):
            f.write(struct.pack("<3f3B", *v[i], *c[i]))
        for a, b, cc in mesh.faces:
            f.write(struct.pack("<B3i", 3, a, b, cc))


def save_point_ply(path, positions: np.ndarray, colors: np.ndarray | None = None):
    """Point-set export: vertex-only binary PLY."""
    pos = np.asarray(positions, dtype="<f4").reshape(-1, 3)
    if colors is None:
        colors = np.full((len(pos), 3), 0.5)
    c = np.clip(np.round(np.asarray(colors) * 255.0), 0, 255).astype(np.uint8)
    header = (
        "ply\nformat binary_little_endian 1.0\n"
        f"element vertex {len(pos)}\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        for i in range(len(pos)):
            f.write(struct.pack("<3f3B", *pos[i], *c[i]))


def load_mesh(path) -> Mesh:
    """Format chosen by extension: .obj or .ply."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return load_obj(path)
    if suffix == ".ply":
        return load_ply(path)
    raise MeshIOError(f"unsupported mesh format: {suffix}")


def save_mesh(path, mesh: Mesh):
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        save_obj(path, mesh)
    elif suffix == ".ply":
        save_ply(path, mesh)
    else:
        raise MeshIOError(f"unsupported mesh format: {suffix}")
