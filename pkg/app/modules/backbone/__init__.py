# app/modules/backbone/__init__.py
from .schemas import STAGE_STRIDES, Encoder, EncoderConfig, FeaturePyramid
from .encoder import (
    INPUT_MULTIPLE,
    add_encoder_params,
    build_encoder,
    check_input,
    encode,
    residual_block,
)

__all__ = [
    "STAGE_STRIDES",
    "Encoder",
    "EncoderConfig",
    "FeaturePyramid",
    "INPUT_MULTIPLE",
    "add_encoder_params",
    "build_encoder",
    "check_input",
    "encode",
    "residual_block",
]
