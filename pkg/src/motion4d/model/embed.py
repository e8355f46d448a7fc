"""Point attribute embedding and sinusoidal position codes.

Point features: [xyz | sin(2^b pi x_a) | cos(2^b pi x_a) | normal | color]
with bands b = 0..B-1 laid out axis-major, projected to the model dimension
by a single linear layer. All trig happens outside the tape (inputs carry no
gradient); only the projection is learnable.
"""

from __future__ import annotations

import numpy as np

from ..nn import Linear, Module
from ..nn.tensor import NonFiniteError, Tensor


def fourier_features(attrs9: np.ndarray, bands: int) -> np.ndarray:
    """(.., 9) point attributes -> (.., 9 + 6*bands) feature rows."""
    a = np.asarray(attrs9, dtype=np.float64)
    if a.shape[-1] != 9:
        raise ValueError(f"expected 9 attributes (xyz, normal, rgb), got {a.shape[-1]}")
    xyz = a[..., 0:3]
    rest = a[..., 3:9]
    freqs = (2.0 ** np.arange(bands)) * np.pi
    ang = xyz[..., :, None] * freqs          # (.., 3, B)
    sin = np.sin(ang).reshape(*a.shape[:-1], 3 * bands)
    cos = np.cos(ang).reshape(*a.shape[:-1], 3 * bands)
    return np.concatenate([xyz, sin, cos, rest], axis=-1)


def point_feature_dim(bands: int) -> int:
    return 9 + 6 * bands


class PointEmbedder(Module):
    """Fourier features + one linear projection to the model dimension."""

    def __init__(self, model_dim: int, bands: int, rng: np.random.Generator,
                 dtype=np.float32):
        self.bands = bands
        self.dtype = dtype
        self.proj = Linear(point_feature_dim(bands), model_dim, rng, dtype=dtype)

    def forward(self, attrs9: np.ndarray) -> Tensor:
        feats = fourier_features(attrs9, self.bands).astype(self.dtype)
        if not np.all(np.isfinite(feats)):
            raise NonFiniteError("non-finite point attributes")
        return self.proj(Tensor(feats))


def sinusoidal_embedding(positions, dim: int) -> np.ndarray:
    """Classic transformer code: pe[p, 2i] = sin(p / 10000^(2i/dim)),
    pe[p, 2i+1] = cos(...). Positions may be any integer array."""
    if dim % 2 != 0:
        raise ValueError("embedding dim must be even")
    pos = np.asarray(positions, dtype=np.float64).reshape(-1, 1)
    div = np.exp(np.arange(0, dim, 2, dtype=np.float64) * (-np.log(10000.0) / dim))
    pe = np.zeros((pos.shape[0], dim))
    pe[:, 0::2] = np.sin(pos * div)
    pe[:, 1::2] = np.cos(pos * div)
    return pe
