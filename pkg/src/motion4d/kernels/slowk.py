"""Pure-numpy fallbacks for the compiled kernels.

Same contracts as _fastk: exact squared distances for the winning neighbor,
identical depth-test and tie rules for the rasterizer.
"""

from __future__ import annotations

import numpy as np


def nn_search(query: np.ndarray, ref: np.ndarray):
    """Index and exact squared distance of the nearest ref point per query.

    Blocked |q|^2+|r|^2-2qr matmul picks the argmin; the winning distance is
    recomputed with the exact per-pair formula (no cancellation error).
    """
    query = np.ascontiguousarray(query, dtype=np.float64)
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    n, k = query.shape[0], ref.shape[0]
    if n == 0 or k == 0:
        raise ValueError("empty point set")
    q2 = (query * query).sum(axis=1)
    r2 = (ref * ref).sum(axis=1)
    idx = np.empty(n, dtype=np.int64)
    block = max(1, int(2 ** 22 // max(1, k)))
    for s in range(0, n, block):
        e = min(s + block, n)
        d2 = q2[s:e, None] + r2[None, :] - 2.0 * (query[s:e] @ ref.T)
        idx[s:e] = np.argmin(d2, axis=1)
    diff = query - ref[idx]
    return idx, (diff * diff).sum(axis=1)


def raster_fill(xy: np.ndarray, depth: np.ndarray, faces: np.ndarray,
                colors: np.ndarray, width: int, height: int):
    """Z-buffer fill of triangles; nearer wins (larger depth). Returns
    (image, zbuf). Same arithmetic as the compiled kernel, pixels vectorized
    per triangle."""
    img = np.zeros((height, width, 3), dtype=np.float64)
    zbuf = np.full((height, width), -np.inf, dtype=np.float64)
    for f in range(faces.shape[0]):
        ia, ib, ic = faces[f]
        ax, ay = xy[ia]
        bx, by = xy[ib]
        cx, cy = xy[ic]
        denom = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if denom == 0.0:
            continue
        px0 = max(0, int(np.floor(min(ax, bx, cx) - 0.5)))
        px1 = min(width - 1, int(np.floor(max(ax, bx, cx) + 0.5)))
        py0 = max(0, int(np.floor(min(ay, by, cy) - 0.5)))
        py1 = min(height - 1, int(np.floor(max(ay, by, cy) + 0.5)))
        if px1 < px0 or py1 < py0:
            continue
        sx = np.arange(px0, px1 + 1, dtype=np.float64) + 0.5
        sy = np.arange(py0, py1 + 1, dtype=np.float64) + 0.5
        gx, gy = np.meshgrid(sx, sy)
        w0 = ((bx - gx) * (cy - gy) - (by - gy) * (cx - gx)) / denom
        w1 = ((cx - gx) * (ay - gy) - (cy - gy) * (ax - gx)) / denom
        w2 = 1.0 - w0 - w1
        inside = (w0 >= 0.0) & (w1 >= 0.0) & (w2 >= 0.0)
        if not inside.any():
            continue
        z = w0 * depth[ia] + w1 * depth[ib] + w2 * depth[ic]
        tile = zbuf[py0:py1 + 1, px0:px1 + 1]
        win = inside & (z > tile)
        if not win.any():
            continue
        tile[win] = z[win]
        ctile = img[py0:py1 + 1, px0:px1 + 1]
        for ch in range(3):
            col = w0 * colors[ia, ch] + w1 * colors[ib, ch] + w2 * colors[ic, ch]
            ctile[..., ch][win] = col[win]
    return img, zbuf
