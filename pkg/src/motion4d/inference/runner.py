"""Long-sequence inference: shape encoded once, windows processed in order,
vertices decoded in memory-bounded chunks."""

from __future__ import annotations

import numpy as np

from ..geometry import Mesh, sample_surface
from ..model import MotionModel
from ..nn import tensor as T
from .windows import plan_windows


def infer_sequence(model: MotionModel, samples, frames: np.ndarray, queries,
                   window_size: int = 256, stats: dict | None = None) -> np.ndarray:
    """Motion flow over all T frames. The shape latent is computed once; each
    window runs the motion blocks over [frame 0 | chunk] with window-local
    temporal positions; frame-0 output comes from the first window.

    `stats`, when given, receives instrumentation: window count and the peak
    per-window token count.
    """
    frames = np.asarray(frames)
    total = frames.shape[0]
    enc_attrs = samples.attributes9() if hasattr(samples, "attributes9") else np.asarray(samples)
    qry_attrs = queries.attributes9() if hasattr(queries, "attributes9") else np.asarray(queries)

    plan = plan_windows(total, window_size=window_size)
    out = np.empty((total, qry_attrs.shape[0], 3), dtype=np.float64)
    peak_tokens = 0
    with T.no_grad():
        shape_tok = model.encode_shape(enc_attrs)
        query_emb = model.point_embed(qry_attrs)
        for w_idx, window in enumerate(plan.windows):
            idx = np.asarray(window)
            feats = model.featurize_frames(frames[idx])
            tokens = model.assemble_frame_tokens(shape_tok, feats,
                                                 frame_positions=np.arange(len(idx)))
            peak_tokens = max(peak_tokens, tokens.shape[-3] * tokens.shape[-2])
            motion = model.motion_tokens(tokens)
            t_local = len(idx)
            q = T.broadcast_to(query_emb.reshape((1,) + query_emb.shape),
                               (t_local,) + query_emb.shape)
            pred = model.decode_motion_embedded(q, motion).data
            if w_idx == 0:
                out[idx] = pred
            else:
                out[idx[1:]] = pred[1:]  # frame-0 prediction kept from window 0
    if stats is not None:
        stats["windows"] = len(plan.windows)
        stats["peak_window_tokens"] = peak_tokens
    flow = out
    if not np.all(np.isfinite(flow)):
        raise T.NonFiniteError("non-finite motion flow")
    return flow


def animate_mesh(model: MotionModel, mesh: Mesh, motion_tokens, chunk: int = 4096) -> np.ndarray:
    """Decode every mesh vertex (with its normal and color as attributes)
    against per-frame motion tokens, in chunks; topology is untouched.
    Returns (T, V, 3) vertex positions."""
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    attrs = np.concatenate([mesh.vertices, mesh.vertex_normals(), mesh.vertex_colors], axis=1)
    t = motion_tokens.shape[0] if hasattr(motion_tokens, "shape") else len(motion_tokens)
    v = mesh.num_vertices
    out = np.empty((t, v, 3), dtype=np.float64)
    with T.no_grad():
        for start in range(0, v, chunk):
            part = attrs[start:start + chunk]
            q = model.point_embed(part.astype(np.float32))
            qb = T.broadcast_to(q.reshape((1,) + q.shape), (t,) + q.shape)
            out[:, start:start + chunk] = model.decode_motion_embedded(qb, motion_tokens).data
    return out


def motion_tokens_for_frames(model: MotionModel, samples, frames: np.ndarray,
                             window_size: int = 256):
    """Per-frame motion tokens over the whole sequence (windowed), for
    vertex animation after track inference. Returns a (T, K, C) Tensor."""
    frames = np.asarray(frames)
    enc_attrs = samples.attributes9() if hasattr(samples, "attributes9") else np.asarray(samples)
    plan = plan_windows(frames.shape[0], window_size=window_size)
    chunks = []
    with T.no_grad():
        shape_tok = model.encode_shape(enc_attrs)
        for w_idx, window in enumerate(plan.windows):
            idx = np.asarray(window)
            feats = model.featurize_frames(frames[idx])
            tokens = model.assemble_frame_tokens(shape_tok, feats,
                                                 frame_positions=np.arange(len(idx)))
            motion = model.motion_tokens(tokens).data
            chunks.append(motion if w_idx == 0 else motion[1:])
    return T.Tensor(np.concatenate(chunks, axis=0))


def sample_queries(mesh: Mesh, n: int, seed: int):
    return sample_surface(mesh, n, seed)
