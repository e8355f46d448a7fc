"""Procedural deformation fields over meshes.

Every field is a smooth function of a phase in [0, 1] with phase(0) = 0, so
frame 0 is always the canonical pose. Kinds:

  bend            rotate about `axis`, angle grows along `drive_axis`
  twist           rotate about `axis`, angle grows along that same axis
  wave            sinusoidal displacement along `axis` driven by `drive_axis`
  part_rotate     rotate the part past `pivot` on `drive_axis`, blended edge
  translate_blend translation (optionally blended along `blend_axis`)
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

KINDS = ("bend", "twist", "wave", "part_rotate", "translate_blend")

_AXES = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))


def _rotate_about(points: np.ndarray, axis: int, angles: np.ndarray,
                  center: np.ndarray) -> np.ndarray:
    """Rodrigues rotation of each point by its own angle about a coordinate
    axis line through `center`."""
    u = _AXES[axis]
    p = points - center
    cos = np.cos(angles)[:, None]
    sin = np.sin(angles)[:, None]
    cross = np.cross(np.broadcast_to(u, p.shape), p)
    dot = (p @ u)[:, None]
    return p * cos + cross * sin + u * dot * (1.0 - cos) + center


def _smoothstep(x: np.ndarray) -> np.ndarray:
    t = np.clip(x, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


@dataclass
class DeformationField:
    kind: str
    frames: int
    amplitude: float = 0.3              # radians, units, or scalar gain
    amplitude_vec: tuple = (0.0, 0.0, 0.0)  # translate_blend displacement
    axis: int = 2
    drive_axis: int = 0
    frequency: float = 1.0
    pivot: float = 0.0
    blend_axis: int | None = None
    blend_width: float = 0.2
    extra: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown deformation kind {self.kind!r}")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")

    def phase(self, t: int) -> float:
        if not 0 <= t < self.frames:
            raise ValueError(f"frame {t} outside [0, {self.frames})")
        if self.frames == 1:
            return 0.0
        return t / (self.frames - 1)

    def displace(self, vertices: np.ndarray, phase: float) -> np.ndarray:
        """Deformed copy of `vertices` at the given phase."""
        v = np.asarray(vertices, dtype=np.float64)
        if phase == 0.0:
            return v.copy()
        if self.kind == "bend":
            angles = self.amplitude * phase * (v[:, self.drive_axis] - self.pivot)
            center = np.zeros(3)
            center[self.drive_axis] = self.pivot
            return _rotate_about(v, self.axis, angles, center)
        if self.kind == "twist":
            angles = self.amplitude * phase * (v[:, self.axis] - self.pivot)
            return _rotate_about(v, self.axis, angles, np.zeros(3))
        if self.kind == "wave":
            disp = self.amplitude * phase * np.sin(
                2.0 * np.pi * self.frequency * (v[:, self.drive_axis] - self.pivot))
            out = v.copy()
            out[:, self.axis] += disp
            return out
        if self.kind == "part_rotate":
            w = _smoothstep((v[:, self.drive_axis] - self.pivot) / self.blend_width)
            angles = self.amplitude * phase * w
            center = np.zeros(3)
            center[self.drive_axis] = self.pivot
            return _rotate_about(v, self.axis, angles, center)
        # translate_blend
        amp = np.asarray(self.amplitude_vec, dtype=np.float64)
        if self.blend_axis is None:
            w = np.ones(len(v))
        else:
            w = _smoothstep((v[:, self.blend_axis] - self.pivot) / self.blend_width)
        return v + phase * w[:, None] * amp

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "frames": self.frames,
            "amplitude": self.amplitude,
            "amplitude_vec": list(self.amplitude_vec),
            "axis": self.axis,
            "drive_axis": self.drive_axis,
            "frequency": self.frequency,
            "pivot": self.pivot,
            "blend_axis": self.blend_axis,
            "blend_width": self.blend_width,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DeformationField":
        d = dict(d)
        d["amplitude_vec"] = tuple(d.get("amplitude_vec", (0.0, 0.0, 0.0)))
        return cls(**d)


def deform_vertices(mesh, field: DeformationField, t: int) -> np.ndarray:
    """Vertex positions of `mesh` at frame t; t=0 is the canonical pose."""
    return field.displace(mesh.vertices, field.phase(t))
