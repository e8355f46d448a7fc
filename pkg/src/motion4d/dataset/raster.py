"""Orthographic camera and the z-buffer frame renderer.

The camera orbits the origin (azimuth about +y, then elevation) and projects
onto a square window covering [-window, window]^2; background is exactly
black. Heavy lifting happens in the kernels module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels


@dataclass
class Camera:
    azimuth: float = 30.0    # degrees about +y
    elevation: float = 20.0  # degrees above the horizon
    window: float = 0.65     # orthographic half-extent

    def axes(self):
        """(right, up, toward-camera) orthonormal triad."""
        a = np.deg2rad(self.azimuth)
        e = np.deg2rad(self.elevation)
        d = np.array([np.cos(e) * np.sin(a), np.sin(e), np.cos(e) * np.cos(a)])
        right = np.array([np.cos(a), 0.0, -np.sin(a)])
        up = np.cross(d, right)
        return right, up, d

    def to_dict(self) -> dict:
        return {"azimuth": self.azimuth, "elevation": self.elevation, "window": self.window}

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        return cls(**d)


def rasterize_frame(vertices: np.ndarray, faces: np.ndarray, colors: np.ndarray,
                    cam: Camera, width: int, height: int) -> np.ndarray:
    """Render one frame: per-pixel barycentric vertex color, nearer surface
    wins, untouched pixels stay (0, 0, 0). Returns (H, W, 3) float in [0,1]."""
    v = np.asarray(vertices, dtype=np.float64)
    right, up, d = cam.axes()
    x = v @ right
    y = v @ up
    depth = v @ d  # larger = closer to the camera
    win = cam.window
    px = (x + win) / (2.0 * win) * width
    py = (win - y) / (2.0 * win) * height
    xy = np.stack([px, py], axis=1)
    img, _ = kernels.raster_fill(xy, depth, np.asarray(faces, dtype=np.int64),
                                 np.asarray(colors, dtype=np.float64), width, height)
    return np.clip(img, 0.0, 1.0).astype(np.float32)
