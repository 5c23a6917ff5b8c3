import logging
from typing import Mapping

import numpy as np

from app.modules.nn_ops import (
    BufferStore,
    NormMode,
    ParamStore,
    conv2d,
    conv_params,
    init_conv,
    init_norm,
    max_pool2d,
    norm_params,
    normalize,
)
from app.modules.tensor_core import Tensor, add, relu
from app.utils.errors import ShapeError
from .schemas import Encoder, EncoderConfig, FeaturePyramid

logger = logging.getLogger(__name__)

INPUT_MULTIPLE = 32


def _block_stride(stage: int, block: int) -> int:
    return 2 if stage > 1 and block == 1 else 1


def add_encoder_params(params: ParamStore, buffers: BufferStore, cfg: EncoderConfig, seed: int) -> None:
    """Register stem and residual-stage parameters under ``stage{i}.block{j}.*``."""
    mode = cfg.norm_mode
    stem_width = cfg.stage_widths[0]
    init_conv(params, seed, "stem.conv", stem_width, cfg.input_channels, 3, bias=False)
    init_norm(params, buffers, "stem.norm", stem_width, mode)

    in_ch = stem_width
    for stage, (width, blocks) in enumerate(zip(cfg.stage_widths, cfg.blocks_per_stage), start=1):
        for block in range(1, blocks + 1):
            prefix = f"stage{stage}.block{block}"
            init_conv(params, seed, f"{prefix}.conv1", width, in_ch, 3, bias=False)
            init_norm(params, buffers, f"{prefix}.norm1", width, mode)
            init_conv(params, seed, f"{prefix}.conv2", width, width, 3, bias=False)
            # Zero scale: every block starts out as its shortcut.
            init_norm(params, buffers, f"{prefix}.norm2", width, mode, zero_scale=True)
            if _block_stride(stage, block) != 1 or in_ch != width:
                init_conv(params, seed, f"{prefix}.proj", width, in_ch, 1, bias=False)
                init_norm(params, buffers, f"{prefix}.proj_norm", width, mode)
            in_ch = width


def build_encoder(cfg: EncoderConfig, rng_seed: int) -> Encoder:
    params: ParamStore = {}
    buffers: BufferStore = {}
    add_encoder_params(params, buffers, cfg, rng_seed)
    logger.debug(f"Built encoder with {len(params)} parameter tensors")
    return Encoder(config=cfg, params=params, buffers=buffers)


def residual_block(
    x: Tensor,
    params: Mapping[str, Tensor],
    buffers: Mapping[str, np.ndarray],
    prefix: str,
    stride: int,
    mode: NormMode,
    training: bool,
) -> Tensor:
    """Basic block: relu(shortcut + norm(conv(relu(norm(conv(x))))))."""
    branch = conv2d(x, conv_params(params, f"{prefix}.conv1", stride=stride, padding=1))
    branch = relu(normalize(branch, norm_params(params, buffers, f"{prefix}.norm1", mode), training))
    branch = conv2d(branch, conv_params(params, f"{prefix}.conv2", padding=1))
    branch = normalize(branch, norm_params(params, buffers, f"{prefix}.norm2", mode), training)

    if f"{prefix}.proj.weight" in params:
        shortcut = conv2d(x, conv_params(params, f"{prefix}.proj", stride=stride))
        shortcut = normalize(
            shortcut, norm_params(params, buffers, f"{prefix}.proj_norm", mode), training
        )
    else:
        shortcut = x
    return relu(add(shortcut, branch))


def check_input(image: Tensor, channels: int) -> None:
    if image.ndim != 4 or image.shape[1] != channels:
        raise ShapeError(f"expected an N x {channels} x H x W image batch, got {image.shape}")
    h, w = image.shape[2:]
    if h % INPUT_MULTIPLE or w % INPUT_MULTIPLE:
        raise ShapeError(
            f"input size {h}x{w} is not divisible by {INPUT_MULTIPLE}; "
            f"pad or crop the image to a multiple of {INPUT_MULTIPLE}"
        )


def encode(enc: Encoder, image: Tensor, training: bool = False) -> FeaturePyramid:
    """Run the encoder and tap stages 1, 3 and 4 (stage 2 stays internal)."""
    cfg = enc.config
    check_input(image, cfg.input_channels)
    params, buffers, mode = enc.params, enc.buffers, cfg.norm_mode

    x = conv2d(image, conv_params(params, "stem.conv", stride=2, padding=1))
    x = relu(normalize(x, norm_params(params, buffers, "stem.norm", mode), training))
    x = max_pool2d(x, 2, 2)

    taps = {}
    for stage, blocks in enumerate(cfg.blocks_per_stage, start=1):
        for block in range(1, blocks + 1):
            x = residual_block(
                x, params, buffers, f"stage{stage}.block{block}",
                _block_stride(stage, block), mode, training,
            )
        taps[stage] = x
    return FeaturePyramid(s1=taps[1], s3=taps[3], s4=taps[4])
