# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: grid-accelerated nearest neighbor and z-buffer
triangle fill. Pure-numpy mirrors live in slowk.py; kernels/__init__ picks
whichever is importable."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor

cnp.import_array()


def nn_search(double[:, ::1] query, double[:, ::1] ref):
    """Index and exact squared distance of the nearest ref point per query."""
    cdef Py_ssize_t n = query.shape[0]
    cdef Py_ssize_t k = ref.shape[0]
    if n == 0 or k == 0:
        raise ValueError("empty point set")

    cdef cnp.ndarray[cnp.int64_t, ndim=1] out_idx = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_d2 = np.empty(n, dtype=np.float64)
    cdef long long[::1] idx_v = out_idx
    cdef double[::1] d2_v = out_d2

    # grid resolution ~ cbrt(k), bounded; degenerate extents collapse to 1 cell
    cdef double lo0 = ref[0, 0], lo1 = ref[0, 1], lo2 = ref[0, 2]
    cdef double hi0 = lo0, hi1 = lo1, hi2 = lo2
    cdef Py_ssize_t i, j
    for i in range(k):
        if ref[i, 0] < lo0: lo0 = ref[i, 0]
        if ref[i, 0] > hi0: hi0 = ref[i, 0]
        if ref[i, 1] < lo1: lo1 = ref[i, 1]
        if ref[i, 1] > hi1: hi1 = ref[i, 1]
        if ref[i, 2] < lo2: lo2 = ref[i, 2]
        if ref[i, 2] > hi2: hi2 = ref[i, 2]

    cdef long g = <long>(k ** (1.0 / 3.0) + 0.5)
    if g < 1: g = 1
    if g > 96: g = 96
    cdef double ext0 = hi0 - lo0, ext1 = hi1 - lo1, ext2 = hi2 - lo2
    cdef long nx = g if ext0 > 0 else 1
    cdef long ny = g if ext1 > 0 else 1
    cdef long nz = g if ext2 > 0 else 1
    cdef double sx = ext0 / nx if nx > 0 and ext0 > 0 else 1.0
    cdef double sy = ext1 / ny if ny > 0 and ext1 > 0 else 1.0
    cdef double sz = ext2 / nz if nz > 0 and ext2 > 0 else 1.0
    cdef double min_side = sx
    if sy < min_side: min_side = sy
    if sz < min_side: min_side = sz

    cdef long ncells = nx * ny * nz
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(ncells + 1, dtype=np.int64)
    cdef long long[::1] counts_v = counts
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cell_of = np.empty(k, dtype=np.int64)
    cdef long long[::1] cell_of_v = cell_of
    cdef long cx, cy, cz, cell

    for i in range(k):
        cx = <long>floor((ref[i, 0] - lo0) / sx)
        cy = <long>floor((ref[i, 1] - lo1) / sy)
        cz = <long>floor((ref[i, 2] - lo2) / sz)
        if cx < 0: cx = 0
        if cx >= nx: cx = nx - 1
        if cy < 0: cy = 0
        if cy >= ny: cy = ny - 1
        if cz < 0: cz = 0
        if cz >= nz: cz = nz - 1
        cell = (cx * ny + cy) * nz + cz
        cell_of_v[i] = cell
        counts_v[cell + 1] += 1

    for i in range(ncells):
        counts_v[i + 1] += counts_v[i]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.empty(k, dtype=np.int64)
    cdef long long[::1] order_v = order
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cursor = counts[:ncells].copy()
    cdef long long[::1] cursor_v = cursor
    for i in range(k):
        cell = cell_of_v[i]
        order_v[cursor_v[cell]] = i
        cursor_v[cell] += 1

    cdef double qx, qy, qz, cqx, cqy, cqz, clampd, best, d, dx, dy, dz, bound
    cdef long best_j, i0, j0, l0, r, rmax, a, b, c
    cdef long lo_a, hi_a, lo_b, hi_b, lo_c, hi_c
    cdef long long s, e, t

    for i in range(n):
        qx = query[i, 0]; qy = query[i, 1]; qz = query[i, 2]
        cqx = qx; cqy = qy; cqz = qz
        if cqx < lo0: cqx = lo0
        if cqx > hi0: cqx = hi0
        if cqy < lo1: cqy = lo1
        if cqy > hi1: cqy = hi1
        if cqz < lo2: cqz = lo2
        if cqz > hi2: cqz = hi2
        clampd = sqrt((qx - cqx) ** 2 + (qy - cqy) ** 2 + (qz - cqz) ** 2)

        i0 = <long>floor((cqx - lo0) / sx)
        j0 = <long>floor((cqy - lo1) / sy)
        l0 = <long>floor((cqz - lo2) / sz)
        if i0 < 0: i0 = 0
        if i0 >= nx: i0 = nx - 1
        if j0 < 0: j0 = 0
        if j0 >= ny: j0 = ny - 1
        if l0 < 0: l0 = 0
        if l0 >= nz: l0 = nz - 1

        best = -1.0
        best_j = -1
        rmax = nx
        if ny > rmax: rmax = ny
        if nz > rmax: rmax = nz

        for r in range(rmax + 1):
            # cells at Chebyshev >= r sit >= (r-1)*min_side from the clamped point
            if best >= 0.0:
                bound = (r - 1) * min_side - clampd
                if bound > 0.0 and best <= bound * bound:
                    break
            lo_a = i0 - r
            hi_a = i0 + r
            for a in range(lo_a, hi_a + 1):
                if a < 0 or a >= nx:
                    continue
                lo_b = j0 - r
                hi_b = j0 + r
                for b in range(lo_b, hi_b + 1):
                    if b < 0 or b >= ny:
                        continue
                    lo_c = l0 - r
                    hi_c = l0 + r
                    for c in range(lo_c, hi_c + 1):
                        if c < 0 or c >= nz:
                            continue
                        # shell only: skip interior already scanned
                        if a != lo_a and a != hi_a and b != lo_b and b != hi_b \
                                and c != lo_c and c != hi_c:
                            continue
                        cell = (a * ny + b) * nz + c
                        s = counts_v[cell]
                        e = counts_v[cell + 1]
                        for t in range(s, e):
                            j = <Py_ssize_t>order_v[t]
                            dx = ref[j, 0] - qx
                            dy = ref[j, 1] - qy
                            dz = ref[j, 2] - qz
                            d = dx * dx + dy * dy + dz * dz
                            if best < 0.0 or d < best or (d == best and j < best_j):
                                best = d
                                best_j = j
        idx_v[i] = best_j
        d2_v[i] = best
    return out_idx, out_d2


def raster_fill(double[:, ::1] xy, double[::1] depth, long long[:, ::1] faces,
                double[:, ::1] colors, long width, long height):
    """Z-buffer fill of triangles given pixel-space xy, per-vertex depth and
    color. Nearer wins (larger depth value). Returns (image, zbuf)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] img = np.zeros((height, width, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zbuf = np.full((height, width), -np.inf, dtype=np.float64)
    cdef double[:, :, ::1] img_v = img
    cdef double[:, ::1] zbuf_v = zbuf

    cdef Py_ssize_t nf = faces.shape[0]
    cdef Py_ssize_t f
    cdef long long ia, ib, ic
    cdef double ax, ay, bx, by, cx, cy, denom
    cdef double minx, maxx, miny, maxy
    cdef long px0, px1, py0, py1, px, py
    cdef double sx, sy, w0, w1, w2, z
    for f in range(nf):
        ia = faces[f, 0]; ib = faces[f, 1]; ic = faces[f, 2]
        ax = xy[ia, 0]; ay = xy[ia, 1]
        bx = xy[ib, 0]; by = xy[ib, 1]
        cx = xy[ic, 0]; cy = xy[ic, 1]
        denom = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if denom == 0.0:
            continue
        minx = ax
        if bx < minx: minx = bx
        if cx < minx: minx = cx
        maxx = ax
        if bx > maxx: maxx = bx
        if cx > maxx: maxx = cx
        miny = ay
        if by < miny: miny = by
        if cy < miny: miny = cy
        maxy = ay
        if by > maxy: maxy = by
        if cy > maxy: maxy = cy
        px0 = <long>floor(minx - 0.5)
        px1 = <long>floor(maxx + 0.5)
        py0 = <long>floor(miny - 0.5)
        py1 = <long>floor(maxy + 0.5)
        if px0 < 0: px0 = 0
        if py0 < 0: py0 = 0
        if px1 >= width: px1 = width - 1
        if py1 >= height: py1 = height - 1
        for py in range(py0, py1 + 1):
            sy = py + 0.5
            for px in range(px0, px1 + 1):
                sx = px + 0.5
                w0 = ((bx - sx) * (cy - sy) - (by - sy) * (cx - sx)) / denom
                w1 = ((cx - sx) * (ay - sy) - (cy - sy) * (ax - sx)) / denom
                w2 = 1.0 - w0 - w1
                if w0 < 0.0 or w1 < 0.0 or w2 < 0.0:
                    continue
                z = w0 * depth[ia] + w1 * depth[ib] + w2 * depth[ic]
                if z > zbuf_v[py, px]:
                    zbuf_v[py, px] = z
                    img_v[py, px, 0] = w0 * colors[ia, 0] + w1 * colors[ib, 0] + w2 * colors[ic, 0]
                    img_v[py, px, 1] = w0 * colors[ia, 1] + w1 * colors[ib, 1] + w2 * colors[ic, 1]
                    img_v[py, px, 2] = w0 * colors[ia, 2] + w1 * colors[ib, 2] + w2 * colors[ic, 2]
    return img, zbuf
