"""Frame featurizers and the "M4FT" precomputed-feature file.

Two implementations satisfy the same contract (frames in, (.., T, P, C)
tokens out): a trainable non-overlapping-patch linear embedder, and a loader
for externally computed features followed by a trainable projection.

M4FT layout (little-endian): magic "M4FT", u32 T, u32 P, u32 C_feat,
f32[T x P x C_feat] data.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..nn import Linear, Module
from ..nn.tensor import Tensor

MAGIC = b"M4FT"


class FeaturizerError(ValueError):
    pass


def write_features(path, feats: np.ndarray):
    f = np.ascontiguousarray(feats, dtype="<f4")
    if f.ndim != 3:
        raise FeaturizerError(f"features must be (T, P, C), got {f.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", *f.shape))
        fh.write(f.tobytes())


def read_features(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise FeaturizerError(f"{path}: bad magic {blob[:4]!r}")
    t, p, c = struct.unpack_from("<III", blob, 4)
    return np.frombuffer(blob, dtype="<f4", count=t * p * c, offset=16).reshape(t, p, c).copy()


def extract_patches(frames: np.ndarray, patch_size: int) -> np.ndarray:
    """(.., H, W, 3) -> (.., P, patch*patch*3) non-overlapping patch rows."""
    f = np.asarray(frames)
    h, w = f.shape[-3], f.shape[-2]
    if h % patch_size or w % patch_size:
        raise FeaturizerError(f"frame size {h}x{w} not divisible by patch {patch_size}")
    gh, gw = h // patch_size, w // patch_size
    lead = f.shape[:-3]
    x = f.reshape(lead + (gh, patch_size, gw, patch_size, 3))
    x = np.moveaxis(x, -3, -4)  # (.., gh, gw, ps, ps, 3)
    return x.reshape(lead + (gh * gw, patch_size * patch_size * 3))


class LearnedPatchFeaturizer(Module):
    """Trainable linear embedding of non-overlapping patches."""

    def __init__(self, model_dim: int, patch_size: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.patch_size = patch_size
        self.dtype = dtype
        self.proj = Linear(patch_size * patch_size * 3, model_dim, rng, dtype=dtype)

    def tokens_for(self, height: int, width: int) -> int:
        return (height // self.patch_size) * (width // self.patch_size)

    def features(self, frames: np.ndarray) -> Tensor:
        patches = extract_patches(frames, self.patch_size).astype(self.dtype)
        return self.proj(Tensor(patches))


class FeatureFileFeaturizer(Module):
    """Precomputed per-frame patch features plus a trainable projection."""

    def __init__(self, feats: np.ndarray | str | Path, model_dim: int,
                 rng: np.random.Generator, dtype=np.float32):
        if isinstance(feats, (str, Path)):
            feats = read_features(feats)
        self.source = np.asarray(feats, dtype=dtype)
        if self.source.ndim != 3:
            raise FeaturizerError(f"features must be (T, P, C_feat), got {self.source.shape}")
        self.dtype = dtype
        self.proj = Linear(self.source.shape[2], model_dim, rng, dtype=dtype)

    def features(self, frames: np.ndarray) -> Tensor:
        t = np.asarray(frames).shape[-4] if np.asarray(frames).ndim >= 4 else len(frames)
        if t != self.source.shape[0]:
            raise FeaturizerError(
                f"feature file has {self.source.shape[0]} frames, got {t} input frames")
        return self.proj(Tensor(self.source))

    def features_for_indices(self, indices) -> Tensor:
        return self.proj(Tensor(self.source[np.asarray(indices)]))
