# app/modules/nn_ops/__init__.py
from .types import NormMode
from .schemas import Conv2dParams, NormParams
from .conv import conv2d, conv_output_size, naive_conv2d
from .pooling import global_avg_pool, max_pool2d
from .resize import (
    bilinear_resize,
    interpolation_matrix,
    resize_bilinear_array,
    resize_nearest_array,
)
from .norm import normalize
from .channels import concat_channels, slice_channels
from .loss import softmax, softmax_ce_loss
from .layers import (
    BufferStore,
    ParamStore,
    conv_params,
    init_conv,
    init_norm,
    norm_params,
    param_rng,
)

__all__ = [
    "NormMode",
    "Conv2dParams",
    "NormParams",
    "conv2d",
    "conv_output_size",
    "naive_conv2d",
    "global_avg_pool",
    "max_pool2d",
    "bilinear_resize",
    "interpolation_matrix",
    "resize_bilinear_array",
    "resize_nearest_array",
    "normalize",
    "concat_channels",
    "slice_channels",
    "softmax",
    "softmax_ce_loss",
    "BufferStore",
    "ParamStore",
    "conv_params",
    "init_conv",
    "init_norm",
    "norm_params",
    "param_rng",
]
