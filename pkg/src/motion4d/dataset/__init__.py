from .deform import KINDS, DeformationField, deform_vertices
from .generate import PRESETS, gen_dataset
from .pngio import PngError, read_png, write_png
from .primitives import PRIMITIVES
from .raster import Camera, rasterize_frame
from .sequence import (
    TRACK_BOUND,
    SequenceSample,
    curate_filter_trivial,
    make_sequence,
    temporal_stride_sample,
)
from .trackio import (
    SequenceDir,
    TrackIOError,
    load_dataset_index,
    read_tracks,
    write_dataset_index,
    write_sequence_dir,
    write_tracks,
)

__all__ = [
    "Camera",
    "DeformationField",
    "KINDS",
    "PRESETS",
    "PRIMITIVES",
    "PngError",
    "SequenceDir",
    "SequenceSample",
    "TRACK_BOUND",
    "TrackIOError",
    "curate_filter_trivial",
    "deform_vertices",
    "gen_dataset",
    "load_dataset_index",
    "make_sequence",
    "rasterize_frame",
    "read_png",
    "read_tracks",
    "temporal_stride_sample",
    "write_dataset_index",
    "write_png",
    "write_sequence_dir",
    "write_tracks",
]
