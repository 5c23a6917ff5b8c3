from typing import Optional

import numpy as np

from app.modules.nn_ops import softmax_ce_loss
from app.modules.tensor_core import Tensor, add, mul
from .schemas import JointLoss, LossWeights


def combine_losses(principal: Tensor, context: Tensor, spatial: Tensor, lw: LossWeights) -> Tensor:
    """L_p + lambda_c * L_c + lambda_s * L_s."""
    return add(add(principal, mul(context, lw.lambda_c)), mul(spatial, lw.lambda_s))


def joint_loss(
    y_p: Tensor,
    y_c: Tensor,
    y_s: Tensor,
    labels: np.ndarray,
    lw: Optional[LossWeights] = None,
    ignore: Optional[int] = None,
) -> JointLoss:
    """Principal plus weighted auxiliary softmax losses; one ignore policy for all three."""
    lw = lw or LossWeights()
    principal = softmax_ce_loss(y_p, labels, ignore)
    context = softmax_ce_loss(y_c, labels, ignore)
    spatial = softmax_ce_loss(y_s, labels, ignore)
    return JointLoss(
        total=combine_losses(principal, context, spatial, lw),
        principal=principal,
        context=context,
        spatial=spatial,
    )
