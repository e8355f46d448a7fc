"""Barycentric-consistent surface sampling.

Each sample keeps its (face, barycentric) identity so the same material point
can be re-evaluated on any deformed copy of the vertex array -- that
reprojection is the ground-truth track generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import GeometryError, Mesh


@dataclass
class SurfacePointSet:
    positions: np.ndarray      # (N, 3)
    normals: np.ndarray        # (N, 3) unit
    colors: np.ndarray         # (N, 3) in [0, 1]
    face_index: np.ndarray     # (N,) face id in the source mesh
    barycentric: np.ndarray    # (N, 3) nonnegative, rows sum to 1
    face_vertices: np.ndarray  # (N, 3) vertex ids of each sample's face
    num_source_vertices: int

    def __len__(self) -> int:
        return len(self.positions)

    def attributes9(self) -> np.ndarray:
        """(N, 9) rows of x,y,z,nx,ny,nz,r,g,b."""
        return np.concatenate([self.positions, self.normals, self.colors], axis=1)

    def subset(self, idx) -> "SurfacePointSet":
        return SurfacePointSet(
            self.positions[idx], self.normals[idx], self.colors[idx],
            self.face_index[idx], self.barycentric[idx], self.face_vertices[idx],
            self.num_source_vertices,
        )


def sample_surface(mesh: Mesh, n: int, seed: int) -> SurfacePointSet:
    """Area-weighted face choice, uniform barycentric draw inside each face.

    Normals are barycentrically interpolated area-weighted vertex normals,
    renormalized; colors interpolate the same way. Deterministic per seed.
    """
    if n < 1:
        raise GeometryError("need at least one sample")
    if mesh.num_faces < 1:
        raise GeometryError("cannot sample an empty mesh")
    areas = mesh.face_areas()
    total = areas.sum()
    if total <= 0:
        raise GeometryError("mesh has no positive-area faces")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(areas / total)
    cum[-1] = 1.0
    face_idx = np.searchsorted(cum, rng.random(n), side="right")
    face_idx = np.minimum(face_idx, mesh.num_faces - 1).astype(np.int64)

    u = rng.random(n)
    w = rng.random(n)
    r = np.sqrt(u)
    bary = np.stack([1.0 - r, r * (1.0 - w), r * w], axis=1)

    fv = mesh.faces[face_idx]
    corners = mesh.vertices[fv]                      # (n, 3, 3)
    positions = np.einsum("nk,nkd->nd", bary, corners)

    vn = mesh.vertex_normals()
    normals = np.einsum("nk,nkd->nd", bary, vn[fv])
    norms = np.linalg.norm(normals, axis=1, keepdims=True)
    norms[norms < 1e-20] = 1.0
    normals = normals / norms

    colors = np.einsum("nk,nkd->nd", bary, mesh.vertex_colors[fv])

    return SurfacePointSet(positions, normals, colors, face_idx, bary, fv,
                           mesh.num_vertices)


def reproject_samples(samples: SurfacePointSet, deformed_vertices: np.ndarray) -> np.ndarray:
    """Positions of the samples on a deformed copy of the source vertices:
    position_i = sum_j bary_ij * deformed[face_vertices_ij]."""
    deformed = np.asarray(deformed_vertices, dtype=np.float64)
    if deformed.ndim != 2 or deformed.shape[0] != samples.num_source_vertices:
        raise GeometryError(
            f"vertex count mismatch: got {deformed.shape[0]}, "
            f"source mesh has {samples.num_source_vertices}")
    corners = deformed[samples.face_vertices]
    return np.einsum("nk,nkd->nd", samples.barycentric, corners)
