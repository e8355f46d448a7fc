"""Similarity registration: closed-form Umeyama solve on known
correspondences and multi-start point-to-point ICP for unknown ones."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .. import kernels
from .mesh import GeometryError, SimilarityTransform


def similarity_align(source: np.ndarray, target: np.ndarray,
                     with_scale: bool = True) -> SimilarityTransform:
    """Least-squares similarity transform mapping source onto target for
    row-wise corresponding point sets (SVD closed form)."""
    src = np.asarray(source, dtype=np.float64)
    dst = np.asarray(target, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 3:
        raise GeometryError("corresponding point sets must both be (N, 3)")
    n = src.shape[0]
    if n < 3:
        raise GeometryError("need at least 3 correspondences")
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    src_c = src - mu_s
    dst_c = dst - mu_d
    var_s = float((src_c * src_c).sum()) / n
    if var_s < 1e-24:
        raise GeometryError("degenerate source: zero variance")
    cov = dst_c.T @ src_c / n
    u, d, vt = np.linalg.svd(cov)
    if d[1] <= 1e-12 * max(d[0], 1e-300):
        raise GeometryError("degenerate (rank-deficient) configuration")
    s = np.ones(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s[2] = -1.0
    rotation = u @ np.diag(s) @ vt
    scale = float((d * s).sum() / var_s) if with_scale else 1.0
    translation = mu_d - scale * rotation @ mu_s
    return SimilarityTransform(rotation, scale, translation)


@dataclass
class IcpResult:
    transform: SimilarityTransform
    rmse: float
    rmse_trace: list[float]
    iterations: int
    converged: bool


def _octahedral_rotations() -> list[np.ndarray]:
    """The 24 rotations of the cube group (signed permutation matrices, det +1)."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            m = np.zeros((3, 3))
            for row, col in enumerate(perm):
                m[row, col] = signs[row]
            if np.isclose(np.linalg.det(m), 1.0):
                out.append(m)
    return out


_OCTAHEDRAL = _octahedral_rotations()


def _nn_rmse(src_t: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    idx, d2 = kernels.nn_search(src_t, target)
    return idx, float(np.sqrt(d2.mean()))


def _refine(source: np.ndarray, target: np.ndarray, transform: SimilarityTransform,
            with_scale: bool, max_iters: int, tol: float):
    """Alternate NN correspondence with a full re-solve from the original
    source; the NN RMSE after each update is non-increasing."""
    trace: list[float] = []
    prev = np.inf
    converged = False
    for _ in range(max_iters):
        src_t = transform.apply(source)
        idx, _ = kernels.nn_search(src_t, target)
        try:
            transform = similarity_align(source, target[idx], with_scale=with_scale)
        except GeometryError:
            break  # collapsed correspondences; keep the last good transform
        _, rmse = _nn_rmse(transform.apply(source), target)
        trace.append(rmse)
        if prev - rmse < tol:
            converged = True
            break
        prev = rmse
    return transform, trace, converged


def _principal_axis_rotations(src_c: np.ndarray, dst_c: np.ndarray) -> list[np.ndarray]:
    """Rotations aligning source principal axes onto target principal axes,
    one per proper sign assignment (4 candidates)."""
    _, es = np.linalg.eigh(src_c.T @ src_c)
    _, ed = np.linalg.eigh(dst_c.T @ dst_c)
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=3):
        rot = ed @ np.diag(signs) @ es.T
        if np.linalg.det(rot) > 0:
            out.append(rot)
    return out


def icp_register(source: np.ndarray, target: np.ndarray, with_scale: bool = True,
                 max_iters: int = 60, tol: float = 1e-10) -> IcpResult:
    """Register source onto target with iterated NN + closed-form similarity
    solves. Arbitrary initial orientations are handled deterministically:
    principal-axis alignments (exact when target is a transformed copy) plus
    the 24 octahedral rotations are scored on a subsample and the winner is
    refined in full; the returned trace belongs to the winning run.
    """
    src = np.asarray(source, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(target, dtype=np.float64).reshape(-1, 3)
    if src.shape[0] < 3 or dst.shape[0] < 3:
        raise GeometryError("icp needs at least 3 points on each side")

    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    rms_s = float(np.sqrt(((src - mu_s) ** 2).sum(axis=1).mean()))
    rms_d = float(np.sqrt(((dst - mu_d) ** 2).sum(axis=1).mean()))
    if rms_s < 1e-15 or rms_d < 1e-15:
        raise GeometryError("degenerate (zero-spread) point set")
    s0 = rms_d / rms_s if with_scale else 1.0

    src_sub = src[:: max(1, src.shape[0] // 512)]
    dst_sub = dst[:: max(1, dst.shape[0] // 1024)]

    rotations = _principal_axis_rotations(src - mu_s, dst - mu_d) + _OCTAHEDRAL
    best_T = None
    best_score = np.inf
    for rot in rotations:
        cand = SimilarityTransform(rot, s0, mu_d - s0 * rot @ mu_s)
        cand, trace, _ = _refine(src_sub, dst_sub, cand, with_scale, max_iters=8, tol=tol)
        score = trace[-1] if trace else np.inf
        if not (0.2 * s0 <= cand.scale <= 5.0 * s0):
            score = np.inf  # scale collapse/explosion: bogus local minimum
        if score < best_score:
            best_score = score
            best_T = cand

    transform, trace, converged = _refine(src, dst, best_T, with_scale, max_iters, tol)
    if not trace:
        _, rmse = _nn_rmse(transform.apply(src), dst)
        trace = [rmse]
    return IcpResult(transform=transform, rmse=trace[-1], rmse_trace=trace,
                     iterations=len(trace), converged=converged)
