from dataclasses import dataclass, field, replace
from typing import Optional

from pydantic import BaseModel, Field, field_validator

from app.modules.attention import AttentionRecord
from app.modules.backbone import Encoder, EncoderConfig
from app.modules.nn_ops import BufferStore, ParamStore
from app.modules.tensor_core import Tensor
from .types import ModelVariant


class ModelConfig(BaseModel):
    num_classes: int = 4
    dim: int = 128
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    variant: ModelVariant = ModelVariant.FULL

    @field_validator("num_classes")
    @classmethod
    def _classes(cls, value: int) -> int:
        if value < 2:
            raise ValueError("num_classes must be at least 2")
        return value

    @field_validator("dim")
    @classmethod
    def _dim(cls, value: int) -> int:
        if value < 2:
            raise ValueError("dim must be at least 2 (the score network halves it)")
        return value


class LossWeights(BaseModel):
    lambda_s: float = Field(default=0.1, ge=0.0)
    lambda_c: float = Field(default=0.4, ge=0.0)


@dataclass
class DfDamModel:
    config: ModelConfig
    params: ParamStore = field(default_factory=dict)
    buffers: BufferStore = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return self.config.num_classes

    @property
    def encoder(self) -> Encoder:
        return Encoder(config=self.config.encoder, params=self.params, buffers=self.buffers)

    def with_params(self, params: ParamStore) -> "DfDamModel":
        return replace(self, params=params)

    def parameter_count(self) -> int:
        return sum(t.size for t in self.params.values())


@dataclass(frozen=True)
class ModelOutput:
    y_p: Tensor  # principal logits, N x K x H x W
    y_c: Tensor  # context auxiliary logits
    y_s: Tensor  # spatial auxiliary logits
    record: Optional[AttentionRecord]  # None for the Sum baseline
    fused_features: Tensor  # X^F before the refine block


@dataclass(frozen=True)
class JointLoss:
    total: Tensor
    principal: Tensor
    context: Tensor
    spatial: Tensor
