from typing import Optional

import numpy as np

from app.modules.nn_ops import Conv2dParams, bilinear_resize, conv2d, global_avg_pool
from app.modules.tensor_core import Tensor, add, mul, sigmoid
from app.utils.errors import ContractError, ShapeError
from .schemas import AttentionHooks, DafmOutput, DafmParams


def channel_weights(high_proj: Tensor, branch: Conv2dParams) -> Tensor:
    """alpha = sigmoid(conv1x1(gap(high_proj))), shape N x D x 1 x 1."""
    if high_proj.ndim != 4 or branch.weight.shape[1] != high_proj.shape[1]:
        raise ShapeError(
            f"channel branch expects {branch.weight.shape[1]} channels, got {high_proj.shape}"
        )
    return sigmoid(conv2d(global_avg_pool(high_proj), branch))


def project_context(low: Tensor, high: Tensor, p: DafmParams) -> tuple[Tensor, Tensor]:
    """1x1-project both context stages to D channels; enlarge the higher one."""
    if low.ndim != 4 or high.ndim != 4 or low.shape[0] != high.shape[0]:
        raise ShapeError(f"context stages must be N x C x H x W with equal N: {low.shape}, {high.shape}")
    if (2 * high.shape[2], 2 * high.shape[3]) != low.shape[2:]:
        raise ShapeError(
            f"high-level stage {high.shape[2:]} must be exactly half of low-level {low.shape[2:]}"
        )
    x_low = conv2d(low, p.proj_low)
    x_high = bilinear_resize(conv2d(high, p.proj_high), x_low.shape[2], x_low.shape[3])
    return x_low, x_high


def dafm_forward(
    low: Tensor, high: Tensor, p: DafmParams, hooks: Optional[AttentionHooks] = None
) -> DafmOutput:
    """fused = alpha_low * X^L + alpha_high * X^H, both weights learned from X^H."""
    x_low, x_high = project_context(low, high, p)
    n, d = x_low.shape[:2]
    if hooks is not None and hooks.alpha is not None:
        alpha_low = alpha_high = Tensor(np.full((n, d, 1, 1), float(hooks.alpha)))
    else:
        if p.branch_low is None or p.branch_high is None:
            raise ContractError("DAFM needs both weight branches unless alpha is forced")
        alpha_low = channel_weights(x_high, p.branch_low)
        alpha_high = channel_weights(x_high, p.branch_high)
    fused = add(mul(alpha_low, x_low), mul(alpha_high, x_high))
    return DafmOutput(fused=fused, alpha_low=alpha_low, alpha_high=alpha_high)


def sum_fusion(low: Tensor, high: Tensor, p: DafmParams) -> Tensor:
    """Plain summation of the two projected context stages."""
    x_low, x_high = project_context(low, high, p)
    return add(x_low, x_high)
