"""Window planning, long-sequence inference, chunked animation, export."""

import numpy as np
import pytest

from motion4d.dataset import DeformationField, Camera, make_sequence
from motion4d.dataset.primitives import box, icosphere
from motion4d.dataset.trackio import read_tracks
from motion4d.geometry import load_obj, normalize_to_cube, sample_surface
from motion4d.inference import (
    animate_mesh,
    export_sequence,
    infer_sequence,
    motion_tokens_for_frames,
    plan_windows,
)
from motion4d.model import ModelConfig, build_model
from motion4d.nn.tensor import Tensor


class TestPlanWindows:
    def test_short_sequence_single_window(self):
        plan = plan_windows(12, window_size=256)
        assert plan.windows == [list(range(12))]

    def test_single_frame(self):
        assert plan_windows(1, window_size=256).windows == [[0]]

    def test_coverage_600(self):
        plan = plan_windows(600, window_size=256)
        assert [w[0] for w in plan.windows] == [0, 0, 0]
        non_ref = [i for w in plan.windows for i in w[1:]]
        assert non_ref == list(range(1, 600))
        assert plan.windows[0][1:] == list(range(1, 256))
        assert plan.windows[1][1:] == list(range(256, 511))
        assert plan.windows[2][1:] == list(range(511, 600))
        assert all(len(w) <= 256 for w in plan.windows)

    def test_coverage_property_random(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            total = int(rng.integers(1, 900))
            size = int(rng.integers(2, 300))
            plan = plan_windows(total, window_size=size)
            non_ref = sorted(i for w in plan.windows for i in w[1:])
            assert non_ref == list(range(1, total))
            assert all(w[0] == 0 for w in plan.windows)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            plan_windows(0)
        with pytest.raises(ValueError):
            plan_windows(10, window_size=1)
        with pytest.raises(ValueError):
            plan_windows(10, window_size=8, stride=3)


@pytest.fixture(scope="module")
def small_setup():
    cfg = ModelConfig.gradcheck_profile()
    model = build_model(cfg, seed=1)
    mesh, _ = normalize_to_cube(box(divisions=3))
    samples = sample_surface(mesh, cfg.encoder_points, seed=0)
    queries = sample_surface(mesh, 40, seed=1)
    rng = np.random.default_rng(2)
    frames = rng.uniform(0, 1, size=(30, cfg.image_size, cfg.image_size, 3)).astype(np.float32)
    return model, mesh, samples, queries, frames


class TestInferSequence:
    def test_single_window_bitwise_equals_forward(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        short = frames[:5]
        direct = model.forward(samples, short, queries)
        windowed = infer_sequence(model, samples, short, queries, window_size=256)
        assert np.array_equal(direct, windowed)

    def test_output_frame_count(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        for t in (1, 7, 30):
            out = infer_sequence(model, samples, frames[:t], queries, window_size=8)
            assert out.shape[0] == t

    def test_window_instrumentation(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        stats = {}
        infer_sequence(model, samples, frames, queries, window_size=8, stats=stats)
        cfg = model.cfg
        assert stats["windows"] == int(np.ceil(29 / 7))
        assert stats["peak_window_tokens"] <= 8 * (cfg.shape_tokens + cfg.patch_tokens)

    def test_motion_transfer_mesh_unrelated_to_video(self, small_setup):
        model, _, samples, _, frames = small_setup
        other, _ = normalize_to_cube(icosphere(subdivisions=1))
        other_queries = sample_surface(other, 25, seed=5)
        out = infer_sequence(model, samples, frames[:4], other_queries)
        assert out.shape == (4, 25, 3)
        assert np.all(np.isfinite(out))


class TestAnimateMesh:
    def test_chunk_invariance(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        tokens = motion_tokens_for_frames(model, samples, frames[:3])
        base = animate_mesh(model, mesh, tokens, chunk=4096)
        for chunk in (1, 7, 256):
            out = animate_mesh(model, mesh, tokens, chunk=chunk)
            assert np.max(np.abs(out - base)) < 1e-6

    def test_chunk_arithmetic(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        tokens = motion_tokens_for_frames(model, samples, frames[:2])
        out = animate_mesh(model, mesh, tokens, chunk=max(1, mesh.num_vertices // 3))
        assert out.shape == (2, mesh.num_vertices, 3)

    def test_bad_chunk(self, small_setup):
        model, mesh, samples, _, frames = small_setup
        tokens = motion_tokens_for_frames(model, samples, frames[:2])
        with pytest.raises(ValueError):
            animate_mesh(model, mesh, tokens, chunk=0)


class TestExport:
    @pytest.fixture()
    def animated(self, small_setup):
        model, mesh, samples, queries, frames = small_setup
        tokens = motion_tokens_for_frames(model, samples, frames[:3])
        verts = animate_mesh(model, mesh, tokens)
        return mesh, verts

    def test_obj_sequence_files(self, animated, tmp_path):
        mesh, verts = animated
        written = export_sequence(verts, mesh, tmp_path, fmt="obj")
        assert [p.name for p in written] == ["mesh_0000.obj", "mesh_0001.obj", "mesh_0002.obj"]
        back = load_obj(written[0])
        assert np.allclose(back.vertices, verts[0], atol=1e-5)
        assert np.array_equal(back.faces, mesh.faces)

    def test_faces_shared_across_frames(self, animated, tmp_path):
        mesh, verts = animated
        written = export_sequence(verts, mesh, tmp_path, fmt="obj")
        f0 = load_obj(written[0]).faces
        for p in written[1:]:
            assert np.array_equal(load_obj(p).faces, f0)

    def test_m4tk_roundtrip_bitwise(self, animated, tmp_path):
        mesh, verts = animated
        (path,) = export_sequence(verts, mesh, tmp_path, fmt="m4tk")
        _, positions = read_tracks(path)
        assert np.array_equal(positions, verts.astype(np.float32))

    def test_unknown_format(self, animated, tmp_path):
        mesh, verts = animated
        with pytest.raises(ValueError):
            export_sequence(verts, mesh, tmp_path, fmt="gltf")
