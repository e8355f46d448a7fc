"""Sequence assembly, trivial-motion curation, temporal stride sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import GeometryError, Mesh, reproject_samples, sample_surface, similarity_align
from ..geometry.sampling import SurfacePointSet
from .deform import DeformationField, deform_vertices
from .raster import Camera, rasterize_frame

TRACK_BOUND = 0.65


@dataclass
class SequenceSample:
    mesh: Mesh
    samples: SurfacePointSet
    tracks: np.ndarray   # (T, M, 3)
    frames: np.ndarray   # (T, H, W, 3) float32
    camera: Camera
    field: DeformationField
    seed: int


def make_sequence(mesh: Mesh, field: DeformationField, num_frames: int, num_points: int,
                  cam: Camera, seed: int, width: int = 64, height: int = 64) -> SequenceSample:
    """Sample the canonical surface once, then per frame reproject the samples
    through the deformed vertices (tracks) and rasterize the deformed mesh."""
    span = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
    if span.max() > 1.0 + 1e-6:
        raise GeometryError("mesh must be normalized to the unit cube first")
    if field.frames != num_frames:
        field = DeformationField.from_dict({**field.to_dict(), "frames": num_frames})

    samples = sample_surface(mesh, num_points, seed)
    tracks = np.empty((num_frames, num_points, 3), dtype=np.float64)
    frames = np.empty((num_frames, height, width, 3), dtype=np.float32)
    for t in range(num_frames):
        verts_t = deform_vertices(mesh, field, t)
        tracks[t] = reproject_samples(samples, verts_t)
        frames[t] = rasterize_frame(verts_t, mesh.faces, mesh.vertex_colors, cam, width, height)
    if np.abs(tracks).max() > TRACK_BOUND:
        raise GeometryError(
            f"tracks leave the [-{TRACK_BOUND}, {TRACK_BOUND}] box; reduce the amplitude")
    return SequenceSample(mesh=mesh, samples=samples, tracks=tracks, frames=frames,
                          camera=cam, field=field, seed=seed)


def curate_filter_trivial(tracks: np.ndarray, threshold: float = 0.02) -> tuple[bool, float]:
    """Motion score: max over frames of the RMS residual after best-fit
    similarity alignment of frame 0 onto frame t (known correspondences),
    normalized by the frame-0 RMS radius so the score is invariant to any
    global similarity applied to the whole sequence. Keep iff score >
    threshold; similarity-only motion scores ~0.

    The score definition (and the 0.02 default) is this package's own
    curation heuristic; treat it as a tunable stand-in, not a canonical
    metric."""
    tracks = np.asarray(tracks, dtype=np.float64)
    if tracks.ndim != 3 or tracks.shape[0] < 2:
        raise GeometryError("need (T>=2, M, 3) tracks")
    ref = tracks[0]
    radius = float(np.sqrt(((ref - ref.mean(axis=0)) ** 2).sum(axis=1).mean()))
    radius = max(radius, 1e-12)
    score = 0.0
    for t in range(1, tracks.shape[0]):
        try:
            align = similarity_align(ref, tracks[t], with_scale=True)
            resid = align.apply(ref) - tracks[t]
        except GeometryError:
            resid = ref - tracks[t]  # degenerate frame: fall back to raw displacement
        rms = float(np.sqrt((resid ** 2).sum(axis=1).mean()))
        score = max(score, rms / radius)
    return score > threshold, score


def temporal_stride_sample(total_frames: int, clip_len: int, strides=(1, 2, 4),
                           rng=None, seed: int | None = None) -> np.ndarray:
    """Random (start, stride) clip indices: stride drawn among the feasible
    strides, start uniform over valid offsets. Deterministic per seed/rng."""
    if rng is None:
        rng = np.random.default_rng(seed)
    feasible = [k for k in strides if (clip_len - 1) * k < total_frames]
    if not feasible:
        raise ValueError(
            f"no valid (start, stride): clip_len={clip_len}, total={total_frames}, strides={strides}")
    k = feasible[int(rng.integers(len(feasible)))]
    max_start = total_frames - 1 - (clip_len - 1) * k
    s = int(rng.integers(max_start + 1))
    return s + k * np.arange(clip_len)
