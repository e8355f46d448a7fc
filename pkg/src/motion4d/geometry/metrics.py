"""Point-set geometry metrics: Chamfer distance and F-score.

Chamfer defaults to non-squared L2 means; the squared variant sits behind a
flag for cross-checking. Every report downstream echoes which variant ran.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from .mesh import GeometryError


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise GeometryError("empty point set")
    return pts


def chamfer_distance(a, b, squared: bool = False) -> float:
    """Symmetric mean nearest-neighbor distance:
    0.5 * (mean_a min_b ||.|| + mean_b min_a ||.||)."""
    pa = _as_points(a)
    pb = _as_points(b)
    _, d2_ab = kernels.nn_search(pa, pb)
    _, d2_ba = kernels.nn_search(pb, pa)
    if squared:
        return 0.5 * (float(d2_ab.mean()) + float(d2_ba.mean()))
    return 0.5 * (float(np.sqrt(d2_ab).mean()) + float(np.sqrt(d2_ba).mean()))


def f_score(a, b, tau: float) -> float:
    """Harmonic mean of precision (fraction of a within tau of b) and recall
    (fraction of b within tau of a); 0 when both vanish."""
    if tau <= 0:
        raise GeometryError("tau must be positive")
    pa = _as_points(a)
    pb = _as_points(b)
    _, d2_ab = kernels.nn_search(pa, pb)
    _, d2_ba = kernels.nn_search(pb, pa)
    precision = float((np.sqrt(d2_ab) <= tau).mean())
    recall = float((np.sqrt(d2_ba) <= tau).mean())
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
