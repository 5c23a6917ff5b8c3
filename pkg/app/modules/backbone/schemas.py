from dataclasses import dataclass, field
from typing import List

from pydantic import BaseModel, field_validator

from app.modules.nn_ops import BufferStore, NormMode, ParamStore
from app.modules.tensor_core import Tensor
from app.utils.helpers import parse_int_list

# Output stride of stages 1-4 relative to the input.
STAGE_STRIDES = (4, 8, 16, 32)


class EncoderConfig(BaseModel):
    stage_widths: List[int] = [32, 64, 128, 256]
    blocks_per_stage: List[int] = [1, 1, 1, 1]
    input_channels: int = 3
    norm_mode: NormMode = NormMode.BATCH

    @field_validator("stage_widths", "blocks_per_stage", mode="before")
    @classmethod
    def _split(cls, value):
        return parse_int_list(value)

    @field_validator("stage_widths")
    @classmethod
    def _widths(cls, value: List[int]) -> List[int]:
        if len(value) != 4 or any(w <= 0 for w in value):
            raise ValueError("stage_widths needs 4 positive channel counts")
        return value

    @field_validator("blocks_per_stage")
    @classmethod
    def _blocks(cls, value: List[int]) -> List[int]:
        if len(value) != 4 or any(b < 1 for b in value):
            raise ValueError("blocks_per_stage needs 4 counts of at least 1")
        return value

    @field_validator("input_channels")
    @classmethod
    def _channels(cls, value: int) -> int:
        if value < 1:
            raise ValueError("input_channels must be positive")
        return value


@dataclass(frozen=True)
class FeaturePyramid:
    s1: Tensor  # stride 4, spatial information
    s3: Tensor  # stride 16, context
    s4: Tensor  # stride 32, context


@dataclass
class Encoder:
    config: EncoderConfig
    params: ParamStore = field(default_factory=dict)
    buffers: BufferStore = field(default_factory=dict)
