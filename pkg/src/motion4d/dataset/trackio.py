"""Track file format "M4TK" and sequence directory layout.

M4TK (little-endian): magic "M4TK", u32 version=1, u32 M, u32 T,
f32[M x 9] reference attributes (x,y,z,nx,ny,nz,r,g,b), f32[T x M x 3]
positions.

A sequence directory holds mesh.obj, frames/frame_%04d.png, tracks.m4tk and
manifest.json (camera, sizes, seed, deformation spec for query resampling).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..geometry import Mesh, load_obj, save_obj
from .deform import DeformationField
from .pngio import read_png, write_png
from .raster import Camera
from .sequence import SequenceSample

MAGIC = b"M4TK"
VERSION = 1


class TrackIOError(RuntimeError):
    pass


def write_tracks(path, ref_attrs: np.ndarray, positions: np.ndarray):
    ref = np.ascontiguousarray(ref_attrs, dtype="<f4")
    pos = np.ascontiguousarray(positions, dtype="<f4")
    m = ref.shape[0]
    if ref.shape != (m, 9):
        raise TrackIOError(f"reference attributes must be (M, 9), got {ref.shape}")
    if pos.ndim != 3 or pos.shape[1] != m or pos.shape[2] != 3:
        raise TrackIOError(f"positions must be (T, {m}, 3), got {pos.shape}")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<III", VERSION, m, pos.shape[0]))
        f.write(ref.tobytes())
        f.write(pos.tobytes())


def read_tracks(path) -> tuple[np.ndarray, np.ndarray]:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise TrackIOError(f"{path}: bad magic {blob[:4]!r}")
    version, m, t = struct.unpack_from("<III", blob, 4)
    if version != VERSION:
        raise TrackIOError(f"{path}: unsupported version {version}")
    off = 16
    ref = np.frombuffer(blob, dtype="<f4", count=m * 9, offset=off).reshape(m, 9).copy()
    off += m * 9 * 4
    pos = np.frombuffer(blob, dtype="<f4", count=t * m * 3, offset=off).reshape(t, m, 3).copy()
    return ref, pos


def write_sequence_dir(seq_dir, sample: SequenceSample):
    seq_dir = Path(seq_dir)
    (seq_dir / "frames").mkdir(parents=True, exist_ok=True)
    save_obj(seq_dir / "mesh.obj", sample.mesh)
    for t in range(sample.tracks.shape[0]):
        write_png(seq_dir / "frames" / f"frame_{t:04d}.png", sample.frames[t])
    write_tracks(seq_dir / "tracks.m4tk", sample.samples.attributes9(), sample.tracks)
    manifest = {
        "mesh": "mesh.obj",
        "tracks": "tracks.m4tk",
        "frames_dir": "frames",
        "num_frames": int(sample.tracks.shape[0]),
        "num_points": int(sample.tracks.shape[1]),
        "width": int(sample.frames.shape[2]),
        "height": int(sample.frames.shape[1]),
        "seed": int(sample.seed),
        "camera": sample.camera.to_dict(),
        "deformation": sample.field.to_dict(),
    }
    (seq_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))


class SequenceDir:
    """Lazy view over one sequence directory."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            self.manifest = json.loads((self.path / "manifest.json").read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise TrackIOError(f"unreadable sequence manifest in {path}: {e}") from e

    @property
    def num_frames(self) -> int:
        return int(self.manifest["num_frames"])

    @property
    def camera(self) -> Camera:
        return Camera.from_dict(self.manifest["camera"])

    @property
    def deformation(self) -> DeformationField | None:
        d = self.manifest.get("deformation")
        return DeformationField.from_dict(d) if d else None

    def load_mesh(self) -> Mesh:
        return load_obj(self.path / self.manifest["mesh"])

    def load_frames(self, indices=None) -> np.ndarray:
        total = self.num_frames
        indices = range(total) if indices is None else indices
        frames = [read_png(self.path / self.manifest["frames_dir"] / f"frame_{t:04d}.png")
                  for t in indices]
        return np.stack(frames)

    def load_tracks(self) -> tuple[np.ndarray, np.ndarray]:
        return read_tracks(self.path / self.manifest["tracks"])


def write_dataset_index(root, kept: list[str], rejected: int):
    root = Path(root)
    index = {"sequences": kept, "rejected": rejected}
    (root / "dataset.json").write_text(json.dumps(index, indent=1, sort_keys=True))


def load_dataset_index(root) -> list[SequenceDir]:
    root = Path(root)
    index_path = root / "dataset.json"
    if not index_path.exists():
        raise TrackIOError(f"{root}: missing dataset.json (not a dataset directory?)")
    index = json.loads(index_path.read_text())
    seqs = [SequenceDir(root / name) for name in index["sequences"]]
    if not seqs:
        raise TrackIOError(f"{root}: dataset has no sequences")
    return seqs
