"""Dataset generation driver: presets pair a primitive with a deformation
family; sequences failing the trivial-motion filter are rejected."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..geometry import normalize_to_cube
from .deform import DeformationField
from .primitives import PRIMITIVES
from .raster import Camera
from .sequence import curate_filter_trivial, make_sequence
from .trackio import write_dataset_index, write_sequence_dir


def _preset_field(name: str, rng: np.random.Generator, frames: int) -> tuple[str, DeformationField]:
    """(primitive name, deformation) for a preset; per-sequence parameter
    jitter comes from rng."""
    if name == "bend-box":
        amp = float(rng.uniform(0.5, 0.9))
        return "box", DeformationField("bend", frames, amplitude=amp, axis=2, drive_axis=0)
    if name == "twist-cylinder":
        amp = float(rng.uniform(0.8, 1.4))
        return "cylinder", DeformationField("twist", frames, amplitude=amp, axis=2, pivot=-0.5)
    if name == "wave-sphere":
        amp = float(rng.uniform(0.06, 0.1))
        return "sphere", DeformationField("wave", frames, amplitude=amp, axis=1,
                                          drive_axis=0, frequency=1.5)
    if name == "part-creature":
        amp = float(rng.uniform(0.4, 0.7))
        return "creature", DeformationField("part_rotate", frames, amplitude=amp, axis=1,
                                            drive_axis=0, pivot=0.15)
    if name == "translate-box":
        vec = (float(rng.uniform(0.05, 0.1)), 0.0, float(rng.uniform(0.02, 0.06)))
        return "box", DeformationField("translate_blend", frames, amplitude_vec=vec,
                                       blend_axis=0, pivot=-0.1, blend_width=0.3)
    if name == "static-box":
        return "box", DeformationField("bend", frames, amplitude=0.0)
    raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")


PRESETS = ("bend-box", "twist-cylinder", "wave-sphere", "part-creature",
           "translate-box", "static-box")


def gen_dataset(out_dir, preset: str, count: int, seed: int, frames: int = 24,
                points: int = 1024, width: int = 64, height: int = 64,
                curation_threshold: float = 0.02) -> tuple[int, int]:
    """Generate `count` candidate sequences; returns (kept, rejected).

    Azimuths are uniformly sampled per sequence; everything is deterministic
    given (preset, count, seed, sizes).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kept: list[str] = []
    rejected = 0
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        prim_name, field = _preset_field(preset, rng, frames)
        mesh, _ = normalize_to_cube(PRIMITIVES[prim_name]())
        cam = Camera(azimuth=float(rng.uniform(0.0, 360.0)),
                     elevation=float(rng.uniform(5.0, 35.0)))
        seq_seed = int(rng.integers(2 ** 31 - 1))
        sample = make_sequence(mesh, field, frames, points, cam, seq_seed,
                               width=width, height=height)
        keep, score = curate_filter_trivial(sample.tracks, curation_threshold)
        if not keep:
            rejected += 1
            continue
        name = f"seq_{i:04d}"
        write_sequence_dir(out_dir / name, sample)
        kept.append(name)
    write_dataset_index(out_dir, kept, rejected)
    return len(kept), rejected
