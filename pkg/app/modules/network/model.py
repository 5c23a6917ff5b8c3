import logging
import re
from typing import Mapping, Optional

import numpy as np

from app.modules.attention import (
    AttentionHooks,
    AttentionRecord,
    DafmParams,
    PamParams,
    dafm_forward,
    gate_spatial,
    project_spatial,
    sum_fusion,
)
from app.modules.backbone import EncoderConfig, add_encoder_params, encode
from app.modules.nn_ops import (
    BufferStore,
    NormMode,
    ParamStore,
    bilinear_resize,
    conv2d,
    conv_params,
    init_conv,
    init_norm,
    norm_params,
    normalize,
)
from app.modules.tensor_core import Tensor, add, relu
from app.utils.errors import LoadError
from .schemas import DfDamModel, ModelConfig, ModelOutput
from .types import ModelVariant

logger = logging.getLogger(__name__)


def build_model(cfg: ModelConfig, seed: int = 0) -> DfDamModel:
    """Initialize every learnable tensor of the configured variant."""
    params: ParamStore = {}
    buffers: BufferStore = {}
    enc = cfg.encoder
    add_encoder_params(params, buffers, enc, seed)

    d, k = cfg.dim, cfg.num_classes
    c1, _, c3, c4 = enc.stage_widths
    init_conv(params, seed, "dafm.proj_low", d, c3, 1, bias=True)
    init_conv(params, seed, "dafm.proj_high", d, c4, 1, bias=True)
    init_conv(params, seed, "pam.proj_spatial", d, c1, 1, bias=True)
    if cfg.variant == ModelVariant.FULL:
        init_conv(params, seed, "dafm.branch_low", d, d, 1, bias=True)
        init_conv(params, seed, "dafm.branch_high", d, d, 1, bias=True)
        init_conv(params, seed, "pam.score1", d // 2, 2 * d, 3, bias=True)
        init_conv(params, seed, "pam.score2", 1, d // 2, 3, bias=True)

    init_conv(params, seed, "refine.conv1", d, d, 3, bias=False)
    init_norm(params, buffers, "refine.norm1", d, enc.norm_mode)
    init_conv(params, seed, "refine.conv2", d, d, 3, bias=False)
    init_norm(params, buffers, "refine.norm2", d, enc.norm_mode)

    init_conv(params, seed, "head", k, d, 1, bias=True)
    init_conv(params, seed, "aux_c", k, d, 1, bias=True)
    init_conv(params, seed, "aux_s", k, d, 1, bias=True)

    model = DfDamModel(config=cfg, params=params, buffers=buffers)
    logger.info(
        f"Built {cfg.variant.value} model: K={k}, D={d}, "
        f"{len(params)} tensors, {model.parameter_count()} parameters"
    )
    return model


def build_baseline(cfg: ModelConfig, seed: int = 0) -> DfDamModel:
    """Same layout with DAFM replaced by summation and 2DPAM bypassed."""
    return build_model(cfg.model_copy(update={"variant": ModelVariant.BASELINE}), seed)


def _refine(x: Tensor, model: DfDamModel, training: bool) -> Tensor:
    params, buffers = model.params, model.buffers
    mode = model.config.encoder.norm_mode
    for i in (1, 2):
        x = conv2d(x, conv_params(params, f"refine.conv{i}", padding=1))
        x = relu(normalize(x, norm_params(params, buffers, f"refine.norm{i}", mode), training))
    return x


def forward(
    model: DfDamModel,
    image: Tensor,
    training: bool = False,
    hooks: Optional[AttentionHooks] = None,
) -> ModelOutput:
    """
    Encoder taps -> DAFM -> upsample -> 2DPAM -> Sum Fusion -> refine -> logits.

    The auxiliary heads classify the fused context (stride 16) and the
    weighted spatial features (stride 4); all logits are resized to the input.
    """
    params = model.params
    pyramid = encode(model.encoder, image, training)
    dafm_p = DafmParams.from_params(params)
    pam_p = PamParams.from_params(params)
    full = model.config.variant == ModelVariant.FULL

    if full:
        dafm_out = dafm_forward(pyramid.s3, pyramid.s4, dafm_p, hooks)
        context = dafm_out.fused
    else:
        context = sum_fusion(pyramid.s3, pyramid.s4, dafm_p)

    h4, w4 = pyramid.s1.shape[2:]
    context_up = bilinear_resize(context, h4, w4)
    x_si = project_spatial(pyramid.s1, pam_p)
    if full:
        pam_out = gate_spatial(x_si, context_up, pam_p, hooks)
        weighted = pam_out.weighted_spatial
    else:
        weighted = x_si

    fused = add(weighted, context_up)
    refined = _refine(fused, model, training)

    h, w = image.shape[2:]
    y_p = bilinear_resize(conv2d(refined, conv_params(params, "head")), h, w)
    y_c = bilinear_resize(conv2d(context, conv_params(params, "aux_c")), h, w)
    y_s = bilinear_resize(conv2d(weighted, conv_params(params, "aux_s")), h, w)

    record = None
    if full:
        record = AttentionRecord.capture(
            dafm_out.alpha_low, dafm_out.alpha_high, pam_out.beta, spatial=x_si
        )
    return ModelOutput(y_p=y_p, y_c=y_c, y_s=y_s, record=record, fused_features=fused)


_BLOCK_RE = re.compile(r"^stage(\d)\.block(\d+)\.conv1\.weight$")


def infer_model_config(tensors: Mapping[str, np.ndarray]) -> ModelConfig:
    """Recover the model configuration from stored tensor names and shapes."""
    try:
        widths = [int(tensors[f"stage{i}.block1.conv1.weight"].shape[0]) for i in range(1, 5)]
        blocks = [0, 0, 0, 0]
        for name in tensors:
            match = _BLOCK_RE.match(name)
            if match:
                stage, block = int(match.group(1)), int(match.group(2))
                blocks[stage - 1] = max(blocks[stage - 1], block)
        encoder = EncoderConfig(
            stage_widths=widths,
            blocks_per_stage=blocks,
            input_channels=int(tensors["stem.conv.weight"].shape[1]),
            norm_mode=NormMode.BATCH if "stem.norm.running_mean" in tensors else NormMode.DISABLED,
        )
        variant = ModelVariant.FULL if "dafm.branch_low.weight" in tensors else ModelVariant.BASELINE
        return ModelConfig(
            num_classes=int(tensors["head.weight"].shape[0]),
            dim=int(tensors["pam.proj_spatial.weight"].shape[0]),
            encoder=encoder,
            variant=variant,
        )
    except KeyError as e:
        raise LoadError(f"checkpoint is missing tensor {e.args[0]!r}") from None


def model_from_tensors(tensors: Mapping[str, np.ndarray]) -> DfDamModel:
    """Rebuild a model whose parameters and buffers are the given arrays."""
    cfg = infer_model_config(tensors)
    template = build_model(cfg, seed=0)
    params: ParamStore = {}
    for name, value in template.params.items():
        if name not in tensors:
            raise LoadError(f"checkpoint is missing parameter {name!r}")
        if tensors[name].shape != value.shape:
            raise LoadError(f"parameter {name!r} has shape {tensors[name].shape}, expected {value.shape}")
        params[name] = Tensor(tensors[name], requires_grad=True)
    buffers: BufferStore = {}
    for name, value in template.buffers.items():
        if name not in tensors:
            raise LoadError(f"checkpoint is missing buffer {name!r}")
        buffers[name] = np.array(tensors[name], dtype=np.float64, copy=True)
    return DfDamModel(config=cfg, params=params, buffers=buffers)
