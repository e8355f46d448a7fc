"""Animated-sequence export: per-frame OBJ files (shared topology) or a
single M4TK track file."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..dataset.trackio import write_tracks
from ..geometry import Mesh, save_obj


def export_sequence(vertex_frames: np.ndarray, mesh: Mesh, out_dir,
                    fmt: str = "obj") -> list[Path]:
    """vertex_frames: (T, V, 3). "obj" writes mesh_%04d.obj with the shared
    face list and vertex colors; "m4tk" writes one track file (vertex normals
    and colors as the reference attributes)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = np.asarray(vertex_frames)
    if frames.ndim != 3 or frames.shape[2] != 3:
        raise ValueError(f"expected (T, V, 3) vertex frames, got {frames.shape}")
    if frames.shape[1] != mesh.num_vertices:
        raise ValueError("vertex count does not match the mesh")
    written: list[Path] = []
    if fmt == "obj":
        for t in range(frames.shape[0]):
            path = out_dir / f"mesh_{t:04d}.obj"
            save_obj(path, Mesh(frames[t], mesh.faces, mesh.vertex_colors))
            written.append(path)
    elif fmt == "m4tk":
        ref = np.concatenate([frames[0], mesh.vertex_normals(), mesh.vertex_colors], axis=1)
        path = out_dir / "tracks.m4tk"
        write_tracks(path, ref, frames)
        written.append(path)
    else:
        raise ValueError(f"unknown export format {fmt!r} (obj or m4tk)")
    return written
