from .export import export_sequence
from .runner import animate_mesh, infer_sequence, motion_tokens_for_frames, sample_queries
from .windows import WindowPlan, plan_windows

__all__ = [
    "WindowPlan",
    "animate_mesh",
    "export_sequence",
    "infer_sequence",
    "motion_tokens_for_frames",
    "plan_windows",
    "sample_queries",
]
