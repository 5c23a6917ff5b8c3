from typing import Optional

import numpy as np

from app.modules.nn_ops import concat_channels, conv2d
from app.modules.tensor_core import Tensor, mul, relu, sigmoid
from app.utils.errors import ContractError, ShapeError
from .schemas import AttentionHooks, PamOutput, PamParams


def project_spatial(spatial: Tensor, p: PamParams) -> Tensor:
    return conv2d(spatial, p.proj_spatial)


def confidence_map(x_si: Tensor, context: Tensor, p: PamParams) -> Tensor:
    """beta in (0, 1), N x 1 x H x W, from spatial and context features jointly."""
    if p.score1 is None or p.score2 is None:
        raise ContractError("2DPAM needs its score network unless beta is forced")
    hidden = relu(conv2d(concat_channels(x_si, context), p.score1))
    return sigmoid(conv2d(hidden, p.score2))


def gate_spatial(
    x_si: Tensor, context: Tensor, p: PamParams, hooks: Optional[AttentionHooks] = None
) -> PamOutput:
    if context.ndim != 4 or context.shape[0] != x_si.shape[0] or context.shape[2:] != x_si.shape[2:]:
        raise ShapeError(
            f"context {context.shape} must be resized to the spatial resolution {x_si.shape}"
        )
    if hooks is not None and hooks.beta is not None:
        n, _, h, w = x_si.shape
        beta = Tensor(np.full((n, 1, h, w), float(hooks.beta)))
    else:
        beta = confidence_map(x_si, context, p)
    return PamOutput(weighted_spatial=mul(beta, x_si), beta=beta)


def pam2d_forward(
    spatial: Tensor, context: Tensor, p: PamParams, hooks: Optional[AttentionHooks] = None
) -> PamOutput:
    """Weighted spatial features beta * X^SI (context must already match resolution)."""
    return gate_spatial(project_spatial(spatial, p), context, p, hooks)
