from .config import ModelConfig
from .embed import PointEmbedder, fourier_features, point_feature_dim, sinusoidal_embedding
from .featurizer import (
    FeatureFileFeaturizer,
    FeaturizerError,
    LearnedPatchFeaturizer,
    extract_patches,
    read_features,
    write_features,
)
from .network import MotionBlocks, MotionDecoder, MotionModel, ShapeEncoder, build_model

__all__ = [
    "FeatureFileFeaturizer",
    "FeaturizerError",
    "LearnedPatchFeaturizer",
    "ModelConfig",
    "MotionBlocks",
    "MotionDecoder",
    "MotionModel",
    "PointEmbedder",
    "ShapeEncoder",
    "build_model",
    "extract_patches",
    "fourier_features",
    "point_feature_dim",
    "read_features",
    "sinusoidal_embedding",
    "write_features",
]
