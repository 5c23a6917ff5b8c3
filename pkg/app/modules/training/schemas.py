from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.modules.network import DfDamModel, LossWeights
from app.utils.helpers import parse_float_list

TRAIN_SCALES = [0.75, 1.0, 1.25, 1.5, 1.75, 2.0]


class TrainConfig(BaseModel):
    batch_size: int = Field(default=1, ge=1)
    initial_lr: float = Field(default=0.01, ge=0.0)
    momentum: float = 0.9
    weight_decay: float = Field(default=5e-4, ge=0.0)
    max_iter: int = Field(default=2000, ge=1)
    lr_power: float = Field(default=0.9, gt=0.0)
    crop_size: int = 64
    scale_set: List[float] = Field(default_factory=lambda: list(TRAIN_SCALES))
    flip_prob: float = Field(default=0.5, ge=0.0, le=1.0)
    # None: use the per-channel mean of the training set
    mean_rgb: Optional[List[float]] = None
    seed: int = Field(default=0, ge=0)
    lambda_s: float = Field(default=0.1, ge=0.0)
    lambda_c: float = Field(default=0.4, ge=0.0)
    # None: every max_iter // 10 iterations, plus the final one
    checkpoint_every: Optional[int] = Field(default=None, ge=1)
    log_every: int = Field(default=10, ge=1)

    @field_validator("scale_set", "mean_rgb", mode="before")
    @classmethod
    def _split(cls, value):
        if value is None or (isinstance(value, str) and not value.strip()):
            return None
        return parse_float_list(value)

    @field_validator("momentum")
    @classmethod
    def _momentum(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        return value

    @field_validator("crop_size")
    @classmethod
    def _crop(cls, value: int) -> int:
        if value < 32 or value % 32:
            raise ValueError("crop_size must be a positive multiple of 32")
        return value

    @field_validator("scale_set")
    @classmethod
    def _scales(cls, value: Optional[List[float]]) -> List[float]:
        if not value:
            raise ValueError("scale_set must not be empty")
        if any(s <= 0 for s in value):
            raise ValueError("every training scale must be positive")
        return value

    @field_validator("mean_rgb")
    @classmethod
    def _mean(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and len(value) != 3:
            raise ValueError("mean_rgb needs exactly 3 values")
        return value

    @property
    def loss_weights(self) -> LossWeights:
        return LossWeights(lambda_s=self.lambda_s, lambda_c=self.lambda_c)

    @property
    def checkpoint_interval(self) -> int:
        return self.checkpoint_every or max(1, self.max_iter // 10)


@dataclass
class OptimizerState:
    velocity: dict[str, np.ndarray] = field(default_factory=dict)
    iteration: int = 0


class TrajectoryRow(NamedTuple):
    iter: int
    lr: float
    L_p: float
    L_c: float
    L_s: float
    joint: float


@dataclass
class TrainResult:
    model: DfDamModel
    state: OptimizerState
    trajectory: list[TrajectoryRow]
    mean_rgb: tuple[float, float, float]


@dataclass
class Checkpoint:
    model: DfDamModel
    state: OptimizerState
    mean_rgb: tuple[float, float, float]
    seed: int = 0
