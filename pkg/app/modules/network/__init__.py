# app/modules/network/__init__.py
from .types import ModelVariant
from .schemas import DfDamModel, JointLoss, LossWeights, ModelConfig, ModelOutput
from .model import (
    build_baseline,
    build_model,
    forward,
    infer_model_config,
    model_from_tensors,
)
from .loss import combine_losses, joint_loss

__all__ = [
    "ModelVariant",
    "DfDamModel",
    "JointLoss",
    "LossWeights",
    "ModelConfig",
    "ModelOutput",
    "build_baseline",
    "build_model",
    "forward",
    "infer_model_config",
    "model_from_tensors",
    "combine_losses",
    "joint_loss",
]
