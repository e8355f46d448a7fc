"""Geometric evaluation protocol.

Register the predicted first frame onto the ground-truth first frame with a
similarity ICP, apply that single transform to every predicted frame, then
score each frame with Chamfer distance and F-score on fresh surface samples.
Track error (squared trajectory error averaged over points and frames) rides
alongside for track inputs.

At full training scale the trajectory error of the complete architecture
lands around 1.8e-3 inside the unit cube (variants without frame attention,
global attention, or the reference token degrade to roughly 5.5e-3, 3.3e-3
and 2.1e-3 respectively); desk runs document these magnitudes rather than
assert them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Mesh, SimilarityTransform, chamfer_distance, f_score, icp_register, sample_surface
from ..training.loss import rec_mse


@dataclass
class EvalReport:
    per_frame_cd: list[float]
    per_frame_fscore: list[float]
    mean_cd: float
    mean_fscore: float
    transform: SimilarityTransform
    tau: float
    samples: int
    chamfer_squared: bool
    seed: int
    rec_mse: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def num_frames(self) -> int:
        return len(self.per_frame_cd)


def _frame_points(frame, n: int, seed: int) -> np.ndarray:
    """A frame is a Mesh (sampled on its surface) or an (N, 3) point set
    (subsampled / passed through)."""
    if isinstance(frame, Mesh):
        return sample_surface(frame, n, seed).positions
    pts = np.asarray(frame, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] > n:
        rng = np.random.default_rng(seed)
        pts = pts[rng.choice(pts.shape[0], size=n, replace=False)]
    return pts


def eval_geometry(pred_frames, gt_frames, samples: int = 50000, tau: float = 0.05,
                  chamfer_squared: bool = False, seed: int = 0,
                  icp_iters: int = 60) -> EvalReport:
    """Scores are invariant (up to sampling noise) to any global similarity
    applied uniformly to the predicted frames: the frame-0 registration
    absorbs it."""
    if len(pred_frames) != len(gt_frames):
        raise ValueError(f"frame count mismatch: {len(pred_frames)} vs {len(gt_frames)}")
    if len(pred_frames) == 0:
        raise ValueError("empty sequence")

    # Both sides share per-frame sampling seeds (common random numbers):
    # evaluating identical geometry scores exactly 0 instead of the
    # ~0.5*sqrt(area/n) noise floor of independent samplings.
    pred0 = _frame_points(pred_frames[0], samples, seed)
    gt0 = _frame_points(gt_frames[0], samples, seed)
    result = icp_register(pred0, gt0, with_scale=True, max_iters=icp_iters)
    transform = result.transform

    cds: list[float] = []
    fss: list[float] = []
    for t in range(len(pred_frames)):
        pred_pts = transform.apply(_frame_points(pred_frames[t], samples, seed + t))
        gt_pts = _frame_points(gt_frames[t], samples, seed + t)
        cds.append(chamfer_distance(pred_pts, gt_pts, squared=chamfer_squared))
        fss.append(f_score(pred_pts, gt_pts, tau))
    return EvalReport(
        per_frame_cd=cds, per_frame_fscore=fss,
        mean_cd=float(np.mean(cds)), mean_fscore=float(np.mean(fss)),
        transform=transform, tau=tau, samples=samples,
        chamfer_squared=chamfer_squared, seed=seed,
        extra={"icp_rmse": result.rmse, "icp_iterations": result.iterations},
    )


def eval_rec_mse(pred_tracks: np.ndarray, gt_tracks: np.ndarray) -> float:
    """Squared trajectory error averaged across points and time steps."""
    return rec_mse(pred_tracks, gt_tracks)
