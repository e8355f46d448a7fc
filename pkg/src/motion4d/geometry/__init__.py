from .mesh import (
    GeometryError,
    Mesh,
    MeshIOError,
    SimilarityTransform,
    load_mesh,
    load_obj,
    load_ply,
    normalize_to_cube,
    save_mesh,
    save_obj,
    save_ply,
    save_point_ply,
)
from .sampling import SurfacePointSet, reproject_samples, sample_surface
from .icp import IcpResult, icp_register, similarity_align
from .metrics import chamfer_distance, f_score

__all__ = [
    "GeometryError",
    "IcpResult",
    "Mesh",
    "MeshIOError",
    "SimilarityTransform",
    "chamfer_distance",
    "f_score",
    "icp_register",
    "load_mesh",
    "load_obj",
    "load_ply",
    "normalize_to_cube",
    "reproject_samples",
    "sample_surface",
    "save_mesh",
    "save_obj",
    "save_ply",
    "save_point_ply",
    "similarity_align",
    "SurfacePointSet",
]
