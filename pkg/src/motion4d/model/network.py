"""The motion synthesis network.

Pipeline: embed colored surface samples, compress them into K latent tokens
with learnable-query cross attention plus self-attention refinement, copy
those tokens into every frame next to the frame's patch tokens, run
alternating global/frame attention, then cross-attend embedded query points
against each frame's first K tokens and regress absolute 3D positions.

Every stage works on (..., tokens, dim) tensors, so a leading batch axis
(and a frame axis) broadcast through unchanged.
"""

from __future__ import annotations

import numpy as np

from ..nn import CrossAttentionBlock, GeluMlp, LayerNorm, Module, SelfAttentionBlock, trunc_normal
from ..nn import tensor as T
from ..nn.tensor import Tensor
from .config import ModelConfig
from .embed import PointEmbedder, sinusoidal_embedding
from .featurizer import LearnedPatchFeaturizer


class ShapeEncoder(Module):
    """K learnable queries cross-attend to point embeddings, then
    self-attention layers refine the token set."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator, dtype=np.float32):
        c, k = cfg.model_dim, cfg.shape_tokens
        self.queries = Tensor(trunc_normal(rng, (k, c), dtype=dtype), requires_grad=True)
        self.cross = CrossAttentionBlock(c, cfg.heads, rng, qk_norm=cfg.qk_norm, dtype=dtype)
        self.self_blocks = [SelfAttentionBlock(c, cfg.heads, rng, qk_norm=cfg.qk_norm, dtype=dtype)
                            for _ in range(cfg.encoder_self_layers)]
        self.out_norm = LayerNorm(c, dtype=dtype)

    def forward(self, embedded_points: Tensor) -> Tensor:
        q = self.queries
        if embedded_points.ndim > 2:
            q = T.broadcast_to(q, embedded_points.shape[:-2] + q.shape)
        x = self.cross(q, embedded_points)
        for blk in self.self_blocks:
            x = blk(x)
        return self.out_norm(x)


class MotionBlocks(Module):
    """Alternating global/frame pre-norm attention over (.., T, K+P, C)."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator, dtype=np.float32):
        self.cfg = cfg
        pairs = cfg.blocks // 2
        c = cfg.model_dim
        self.global_blocks = [SelfAttentionBlock(c, cfg.heads, rng, qk_norm=cfg.qk_norm, dtype=dtype)
                              for _ in range(pairs)]
        self.frame_blocks = [SelfAttentionBlock(c, cfg.heads, rng, qk_norm=cfg.qk_norm, dtype=dtype)
                             for _ in range(pairs)]

    def forward(self, tokens: Tensor) -> Tensor:
        lead = tokens.shape[:-3]
        t, n, c = tokens.shape[-3:]
        for g_blk, f_blk in zip(self.global_blocks, self.frame_blocks):
            if self.cfg.use_global_attn:
                flat = tokens.reshape(lead + (t * n, c))
                flat = g_blk(flat)
                tokens = flat.reshape(lead + (t, n, c))
            if self.cfg.use_frame_attn:
                tokens = f_blk(tokens)
        return tokens


class MotionDecoder(Module):
    """QK-norm cross attention from embedded queries to a frame's motion
    tokens (residual kept around the query stream), then a two-layer GELU
    head to absolute coordinates. Queries never see each other, so any
    chunking yields identical results."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator, dtype=np.float32):
        c = cfg.model_dim
        self.cross = CrossAttentionBlock(c, cfg.heads, rng, qk_norm=cfg.qk_norm, dtype=dtype)
        self.head_norm = LayerNorm(c, dtype=dtype)
        self.head = GeluMlp(c, c, 3, rng, dtype=dtype)

    def forward(self, query_emb: Tensor, motion_tokens: Tensor) -> Tensor:
        x = self.cross(query_emb, motion_tokens)
        return self.head(self.head_norm(x))


class MotionModel(Module):
    def __init__(self, cfg: ModelConfig, rng: np.random.Generator | int = 0,
                 dtype=np.float32, featurizer: Module | None = None):
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        self.cfg = cfg
        self.dtype = dtype
        self.point_embed = PointEmbedder(cfg.model_dim, cfg.fourier_bands, rng, dtype=dtype)
        self.encoder = ShapeEncoder(cfg, rng, dtype=dtype)
        if featurizer is None:
            if cfg.image_size % cfg.patch_size or \
                    (cfg.image_size // cfg.patch_size) ** 2 != cfg.patch_tokens:
                raise ValueError(
                    f"patch grid ({cfg.image_size}/{cfg.patch_size})^2 must equal "
                    f"patch_tokens={cfg.patch_tokens}")
            featurizer = LearnedPatchFeaturizer(cfg.model_dim, cfg.patch_size, rng, dtype=dtype)
        self.featurizer = featurizer
        self.ref_token = Tensor(trunc_normal(rng, (cfg.model_dim,), dtype=dtype),
                                requires_grad=True)
        self.motion_blocks = MotionBlocks(cfg, rng, dtype=dtype)
        self.decoder = MotionDecoder(cfg, rng, dtype=dtype)

    # -- stages ---------------------------------------------------------------

    def encode_shape(self, attrs9: np.ndarray) -> Tensor:
        """(.., N, 9) surface attributes -> (.., K, C) shape tokens."""
        return self.encoder(self.point_embed(attrs9))

    def featurize_frames(self, frames: np.ndarray) -> Tensor:
        """(.., T, H, W, 3) images -> (.., T, P, C) patch tokens."""
        feats = self.featurizer.features(frames)
        if feats.shape[-2] != self.cfg.patch_tokens:
            raise ValueError(
                f"featurizer produced {feats.shape[-2]} tokens per frame, "
                f"config expects {self.cfg.patch_tokens}")
        return feats

    def assemble_frame_tokens(self, shape_tokens: Tensor, frame_feats: Tensor,
                              frame_positions=None) -> Tensor:
        """Per frame: [shape-token copy (K) | patch tokens (P)]; sinusoidal
        spatial code on patches, sinusoidal temporal code (frame position) on
        every token, learnable reference vector added to all of frame 0."""
        cfg = self.cfg
        t, p, c = frame_feats.shape[-3:]
        if p != cfg.patch_tokens or c != cfg.model_dim:
            raise ValueError(f"frame features (..,{t},{p},{c}) do not match config")
        if frame_positions is None:
            frame_positions = np.arange(t)
        frame_positions = np.asarray(frame_positions)
        if frame_positions.shape != (t,):
            raise ValueError("need one temporal position per frame")

        spatial = sinusoidal_embedding(np.arange(p), c).astype(self.dtype)
        patches = frame_feats + Tensor(spatial)

        lead = frame_feats.shape[:-3]
        k = cfg.shape_tokens
        shape_rep = shape_tokens.reshape(lead + (1, k, c))
        shape_rep = T.broadcast_to(shape_rep, lead + (t, k, c))
        tokens = T.concat([shape_rep, patches], axis=-2)

        temporal = sinusoidal_embedding(frame_positions, c).astype(self.dtype)
        tokens = tokens + Tensor(temporal[:, None, :])

        if cfg.use_ref_token:
            first = tokens[..., 0:1, :, :] + self.ref_token
            if t > 1:
                tokens = T.concat([first, tokens[..., 1:, :, :]], axis=-3)
            else:
                tokens = first
        return tokens

    def motion_tokens(self, tokens: Tensor) -> Tensor:
        """Run the alternating blocks and keep rows 0..K-1 of each frame."""
        out = self.motion_blocks(tokens)
        return out[..., : self.cfg.shape_tokens, :]

    def decode_motion(self, query_attrs9: np.ndarray, motion_tokens: Tensor) -> Tensor:
        """(.., M, 9) query attributes + (.., K, C) tokens -> (.., M, 3)."""
        return self.decoder(self.point_embed(query_attrs9), motion_tokens)

    # -- end to end -----------------------------------------------------------

    def forward_tracks(self, encoder_attrs: np.ndarray, frames: np.ndarray,
                       query_attrs: np.ndarray, frame_positions=None) -> Tensor:
        """Differentiable pipeline: (.., N, 9) attrs, (.., T, H, W, 3) frames,
        (.., M, 9) queries -> (.., T, M, 3) positions."""
        shape_tok = self.encode_shape(encoder_attrs)
        feats = self.featurize_frames(frames)
        tokens = self.assemble_frame_tokens(shape_tok, feats, frame_positions)
        motion = self.motion_tokens(tokens)

        q = self.point_embed(query_attrs)
        lead = q.shape[:-2]
        m, c = q.shape[-2:]
        t = motion.shape[-3]
        q = q.reshape(lead + (1, m, c))
        q = T.broadcast_to(q, lead + (t, m, c))
        return self.decode_motion_embedded(q, motion)

    def decode_motion_embedded(self, query_emb: Tensor, motion_tokens: Tensor) -> Tensor:
        return self.decoder(query_emb, motion_tokens)

    def forward(self, samples, frames: np.ndarray, queries) -> np.ndarray:
        """Inference entry: SurfacePointSet + (T, H, W, 3) frames +
        SurfacePointSet queries -> (T, M, 3) numpy positions."""
        enc = samples.attributes9() if hasattr(samples, "attributes9") else np.asarray(samples)
        qry = queries.attributes9() if hasattr(queries, "attributes9") else np.asarray(queries)
        with T.no_grad():
            out = self.forward_tracks(enc, np.asarray(frames), qry)
        flow = out.data.astype(np.float64)
        if not np.all(np.isfinite(flow)):
            raise T.NonFiniteError("non-finite motion flow")
        return flow


def build_model(cfg: ModelConfig, seed: int = 0, dtype=np.float32,
                featurizer: Module | None = None) -> MotionModel:
    return MotionModel(cfg, np.random.default_rng(np.random.SeedSequence((seed, 77))),
                       dtype=dtype, featurizer=featurizer)
