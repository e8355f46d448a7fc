"""motion4d: feed-forward 4D synthesis at desk scale.

Encodes a colored reference surface into latent tokens, fuses them with
per-frame video features through alternating global/frame attention, and
decodes per-frame 3D positions for arbitrary query points. Ships with the
procedural dataset generator and the geometric evaluation harness.
"""

from ._mem import tune_allocator as _tune_allocator

_tune_allocator()

__version__ = "0.1.0"


def __getattr__(name):
    # submodules stay import-light; surface the common entry points lazily
    if name in ("geometry", "dataset", "model", "training", "inference", "evalh",
                "kernels", "nn"):
        import importlib

        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
