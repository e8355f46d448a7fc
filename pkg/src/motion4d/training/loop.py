"""Training: per-step batch assembly with fresh query resampling, the
optimization step, and the checkpointed loop.

Reproducibility contract: the batch for step s is a pure function of
(seed, s) via SeedSequence, so a resumed run replays the identical stream;
optimizer moments ride inside the checkpoint container.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset import SequenceDir, load_dataset_index, temporal_stride_sample
from ..geometry import Mesh, reproject_samples, sample_surface
from ..model import build_model
from ..nn import AdamW, checkpoint, clip_grad_norm, cosine_warmup_lr
from ..nn.tensor import NonFiniteError
from .config import TrainConfig
from .loss import mse_loss


@dataclass
class ClipBatch:
    encoder_attrs: np.ndarray  # (B, N, 9)
    frames: np.ndarray         # (B, T, H, W, 3)
    query_attrs: np.ndarray    # (B, M, 9)
    gt: np.ndarray             # (B, T, M, 3)


@dataclass
class StepStats:
    step: int
    lr: float
    loss: float
    grad_norm: float


class SequenceData:
    """Fully materialized sequence: mesh, frames, deformation, stored tracks."""

    def __init__(self, seq: SequenceDir):
        self.mesh = seq.load_mesh()
        self.frames = seq.load_frames()
        self.field = seq.deformation
        self.ref_attrs, self.positions = seq.load_tracks()
        self.num_frames = seq.num_frames

    def clip(self, indices: np.ndarray, n_enc: int, n_query: int, rng: np.random.Generator):
        """Encoder attrs, query attrs and ground-truth tracks for one clip.

        The clip's first frame is its reference pose: points are freshly
        sampled on the mesh deformed to that frame, then reprojected through
        every clip frame (barycentric identities are frame-independent)."""
        if self.field is not None:
            ref_mesh = Mesh(self.field.displace(self.mesh.vertices, self.field.phase(int(indices[0]))),
                            self.mesh.faces, self.mesh.vertex_colors)
            enc = sample_surface(ref_mesh, n_enc, seed=int(rng.integers(2 ** 63)))
            qry = sample_surface(ref_mesh, n_query, seed=int(rng.integers(2 ** 63)))
            gt = np.empty((len(indices), n_query, 3), dtype=np.float32)
            for j, t in enumerate(indices):
                verts_t = self.field.displace(self.mesh.vertices, self.field.phase(int(t)))
                gt[j] = reproject_samples(qry, verts_t)
            return enc.attributes9(), qry.attributes9(), gt
        # no stored deformation: fall back to subsets of the stored track
        # points, clips anchored at the stored reference frame
        indices = indices - indices[0]
        m_stored = self.ref_attrs.shape[0]
        enc_idx = rng.integers(0, m_stored, size=n_enc)
        qry_idx = rng.integers(0, m_stored, size=n_query)
        gt = self.positions[indices][:, qry_idx].astype(np.float32)
        return self.ref_attrs[enc_idx], self.ref_attrs[qry_idx], gt


def assemble_batch(sequences: list[SequenceData], cfg: TrainConfig, step: int) -> ClipBatch:
    """Batch for step `step`: per item, a random sequence, a temporal-stride
    clip, and fresh encoder/query point draws (dense supervision)."""
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, step)))
    enc_list, frame_list, qry_list, gt_list = [], [], [], []
    for _ in range(cfg.batch_size):
        seq = sequences[int(rng.integers(len(sequences)))]
        indices = temporal_stride_sample(seq.num_frames, cfg.clip_len, cfg.strides, rng=rng)
        if seq.field is None:
            indices = indices - indices[0]
        enc, qry, gt = seq.clip(indices, cfg.encoder_points, cfg.decoder_points, rng)
        enc_list.append(enc)
        qry_list.append(qry)
        gt_list.append(gt)
        frame_list.append(seq.frames[indices])
    return ClipBatch(
        encoder_attrs=np.stack(enc_list).astype(np.float32),
        frames=np.stack(frame_list),
        query_attrs=np.stack(qry_list).astype(np.float32),
        gt=np.stack(gt_list),
    )


def train_step(model, opt: AdamW, batch: ClipBatch, cfg: TrainConfig) -> StepStats:
    """Forward, loss, backward, clip, AdamW step at the scheduled lr.
    Returns the pre-step loss; a non-finite loss aborts before any update."""
    pred = model.forward_tracks(batch.encoder_attrs, batch.frames, batch.query_attrs)
    loss = mse_loss(pred, batch.gt)
    loss_val = float(loss.data)
    if not np.isfinite(loss_val):
        raise NonFiniteError(f"non-finite loss at optimizer step {opt.step_count}")
    model.zero_grad()
    loss.backward(free=True)
    grad_norm = clip_grad_norm([p for _, p in opt.params], cfg.max_grad_norm)
    lr = cosine_warmup_lr(min(opt.step_count + 1, cfg.steps), cfg.warmup, max(cfg.steps, 1),
                          cfg.lr, cfg.min_lr) if cfg.steps else 0.0
    opt.step(lr)
    return StepStats(step=opt.step_count - 1, lr=lr, loss=loss_val, grad_norm=grad_norm)


def save_training_checkpoint(path, model, opt: AdamW):
    checkpoint.save_model(path, model, extra=opt.state_arrays())


def load_training_checkpoint(path, model, opt: AdamW | None):
    leftover = checkpoint.load_model(path, model)
    if opt is not None and "opt.step" in leftover:
        opt.load_state_arrays(leftover)
    return leftover


def train_loop(dataset_dir, cfg: TrainConfig, out_dir, resume=None,
               log_name: str = "metrics.jsonl") -> tuple[Path, list[StepStats]]:
    """Full run: per step draw a batch, step the optimizer, append one log
    record; periodic + final checkpoints land in out_dir. Returns the final
    checkpoint path and the per-step stats."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sequences = [SequenceData(s) for s in load_dataset_index(dataset_dir)]

    model = build_model(cfg.to_model_config(), seed=cfg.seed)
    opt = AdamW(list(model.named_parameters()), lr=cfg.lr, beta1=cfg.beta1,
                beta2=cfg.beta2, weight_decay=cfg.weight_decay)
    if resume is not None:
        load_training_checkpoint(resume, model, opt)

    start = opt.step_count
    log_path = out_dir / log_name
    final_path = out_dir / "checkpoint_final.m4ck"
    stats: list[StepStats] = []
    mode = "a" if resume is not None else "w"
    with open(log_path, mode) as log:
        if cfg.steps == 0:
            save_training_checkpoint(final_path, model, opt)
            return final_path, stats
        for step in range(start, cfg.steps):
            batch = assemble_batch(sequences, cfg, step)
            st = train_step(model, opt, batch, cfg)
            stats.append(st)
            log.write(json.dumps({"step": st.step, "lr": st.lr, "loss": st.loss,
                                  "grad_norm": st.grad_norm}) + "\n")
            if (step + 1) % cfg.checkpoint_every == 0 and step + 1 < cfg.steps:
                save_training_checkpoint(out_dir / f"checkpoint_{step + 1:06d}.m4ck", model, opt)
    save_training_checkpoint(final_path, model, opt)
    return final_path, stats
