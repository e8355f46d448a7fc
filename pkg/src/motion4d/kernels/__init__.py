"""Hot-kernel dispatch: compiled Cython extension when present, numpy
fallback otherwise. `BACKEND` names the active implementation; both expose
`nn_search` and `raster_fill` with identical contracts.

Set MOTION4D_FORCE_SLOW_KERNELS=1 to pin the fallback (benchmarks, tests).
"""

import os

from . import slowk

if os.environ.get("MOTION4D_FORCE_SLOW_KERNELS") == "1":
    _impl = slowk
    BACKEND = "python"
else:
    try:
        from . import _fastk as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = slowk
        BACKEND = "python"


def nn_search(query, ref):
    import numpy as np

    q = np.ascontiguousarray(query, dtype=np.float64)
    r = np.ascontiguousarray(ref, dtype=np.float64)
    return _impl.nn_search(q, r)


def raster_fill(xy, depth, faces, colors, width, height):
    import numpy as np

    return _impl.raster_fill(
        np.ascontiguousarray(xy, dtype=np.float64),
        np.ascontiguousarray(depth, dtype=np.float64),
        np.ascontiguousarray(faces, dtype=np.int64),
        np.ascontiguousarray(colors, dtype=np.float64),
        int(width), int(height),
    )
