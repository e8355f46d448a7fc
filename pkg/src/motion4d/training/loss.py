"""Trajectory reconstruction loss: mean over points and frames of the
squared L2 norm between predicted and ground-truth positions (the norm sums
the three coordinates; only the point/frame axes are averaged)."""

from __future__ import annotations

import numpy as np

from ..nn.tensor import Tensor


def mse_loss(pred: Tensor, gt) -> Tensor:
    target = gt.data if isinstance(gt, Tensor) else np.asarray(gt)
    if tuple(pred.shape) != tuple(target.shape):
        raise ValueError(f"shape mismatch: pred {pred.shape} vs gt {target.shape}")
    if pred.shape[-1] != 3:
        raise ValueError("positions must have a trailing coordinate axis of 3")
    count = int(np.prod(pred.shape[:-1]))  # points x frames (x batch)
    diff = pred - Tensor(target.astype(pred.data.dtype))
    return (diff * diff).sum() * (1.0 / count)


def rec_mse(pred: np.ndarray, gt: np.ndarray) -> float:
    """Metric-only evaluation of the same quantity (no tape)."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    count = int(np.prod(pred.shape[:-1]))
    return float(((pred - gt) ** 2).sum() / count)
