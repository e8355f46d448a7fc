"""Self-describing binary checkpoint container, magic "M4CK".

Layout (little-endian): magic, u32 version, then one record per named array:
u32 name length, UTF-8 name, u32 rank, u32 extents, raw float32 payload.
Round-trips are bitwise exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"M4CK"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_arrays(path, arrays: dict[str, np.ndarray]):
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        for name, arr in arrays.items():
            a = np.ascontiguousarray(arr, dtype="<f4")
            nb = name.encode("utf-8")
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<I", a.ndim))
            f.write(struct.pack(f"<{a.ndim}I", *a.shape))
            f.write(a.tobytes())


def load_arrays(path) -> dict[str, np.ndarray]:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {blob[:4]!r}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    out: dict[str, np.ndarray] = {}
    off = 8
    end = len(blob)
    while off < end:
        (nlen,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off:off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<I", blob, off)
        off += 4
        shape = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        count = int(np.prod(shape)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=off).reshape(shape)
        off += 4 * count
        out[name] = arr.copy()
    return out


def save_model(path, model, extra: dict[str, np.ndarray] | None = None):
    arrays = {name: p.data for name, p in model.named_parameters()}
    if extra:
        arrays.update(extra)
    save_arrays(path, arrays)


def load_model(path, model) -> dict[str, np.ndarray]:
    """Load matching parameters into the model; returns the leftover records
    (optimizer state and friends)."""
    arrays = load_arrays(path)
    leftover = dict(arrays)
    for name, p in model.named_parameters():
        if name not in arrays:
            raise CheckpointError(f"checkpoint missing parameter {name}")
        a = arrays[name]
        if tuple(a.shape) != tuple(p.data.shape):
            raise CheckpointError(
                f"shape mismatch for {name}: checkpoint {a.shape} vs model {p.data.shape}")
        p.data = a.astype(p.data.dtype)
        del leftover[name]
    return leftover
