# app/modules/training/__init__.py
from .schemas import (
    TRAIN_SCALES,
    Checkpoint,
    OptimizerState,
    TrainConfig,
    TrainResult,
    TrajectoryRow,
)
from .optimizer import decays, init_optimizer, poly_lr, sgd_step
from .augment import augment, scaled_size
from .checkpoint import (
    MAGIC,
    VERSION,
    decode_tensors,
    encode_tensors,
    load_checkpoint,
    save_checkpoint,
)
from .trainer import TRAJECTORY_HEADER, sample_order, train, trajectory_path, write_trajectory
from .ablation import AblationArm, ArmResult, arm_setup, format_ablation, run_ablation

__all__ = [
    "TRAIN_SCALES",
    "Checkpoint",
    "OptimizerState",
    "TrainConfig",
    "TrainResult",
    "TrajectoryRow",
    "decays",
    "init_optimizer",
    "poly_lr",
    "sgd_step",
    "augment",
    "scaled_size",
    "MAGIC",
    "VERSION",
    "decode_tensors",
    "encode_tensors",
    "load_checkpoint",
    "save_checkpoint",
    "TRAJECTORY_HEADER",
    "sample_order",
    "train",
    "trajectory_path",
    "write_trajectory",
    "AblationArm",
    "ArmResult",
    "arm_setup",
    "format_ablation",
    "run_ablation",
]
