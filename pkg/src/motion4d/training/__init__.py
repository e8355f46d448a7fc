from .config import TrainConfig, apply_overrides, load_config, save_config
from .loss import mse_loss, rec_mse
from .loop import (
    ClipBatch,
    SequenceData,
    StepStats,
    assemble_batch,
    load_training_checkpoint,
    save_training_checkpoint,
    train_loop,
    train_step,
)

__all__ = [
    "ClipBatch",
    "SequenceData",
    "StepStats",
    "TrainConfig",
    "apply_overrides",
    "assemble_batch",
    "load_config",
    "load_training_checkpoint",
    "mse_loss",
    "rec_mse",
    "save_config",
    "save_training_checkpoint",
    "train_loop",
    "train_step",
]
