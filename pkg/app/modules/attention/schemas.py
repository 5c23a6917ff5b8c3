from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

from app.modules.nn_ops import Conv2dParams, conv_params
from app.modules.tensor_core import Tensor


@dataclass(frozen=True)
class DafmParams:
    proj_low: Conv2dParams  # 1x1, C3 -> D
    proj_high: Conv2dParams  # 1x1, C4 -> D
    # None in the Sum baseline, which has no weight-vector branches.
    branch_low: Optional[Conv2dParams] = None
    branch_high: Optional[Conv2dParams] = None

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str = "dafm") -> "DafmParams":
        has_branches = f"{prefix}.branch_low.weight" in params
        return cls(
            proj_low=conv_params(params, f"{prefix}.proj_low"),
            proj_high=conv_params(params, f"{prefix}.proj_high"),
            branch_low=conv_params(params, f"{prefix}.branch_low") if has_branches else None,
            branch_high=conv_params(params, f"{prefix}.branch_high") if has_branches else None,
        )


@dataclass(frozen=True)
class PamParams:
    proj_spatial: Conv2dParams  # 1x1, C1 -> D
    score1: Optional[Conv2dParams] = None  # 3x3, 2D -> D/2
    score2: Optional[Conv2dParams] = None  # 3x3, D/2 -> 1

    @classmethod
    def from_params(cls, params: Mapping[str, Tensor], prefix: str = "pam") -> "PamParams":
        has_scores = f"{prefix}.score1.weight" in params
        return cls(
            proj_spatial=conv_params(params, f"{prefix}.proj_spatial"),
            score1=conv_params(params, f"{prefix}.score1", padding=1) if has_scores else None,
            score2=conv_params(params, f"{prefix}.score2", padding=1) if has_scores else None,
        )


@dataclass(frozen=True)
class AttentionHooks:
    """Force the learned weights to constants.

    Only honoured when passed explicitly to a forward; used to reduce the
    network to its ablation baselines.
    """

    alpha: Optional[float] = None
    beta: Optional[float] = None


class DafmOutput(NamedTuple):
    fused: Tensor
    alpha_low: Tensor
    alpha_high: Tensor


class PamOutput(NamedTuple):
    weighted_spatial: Tensor
    beta: Tensor


@dataclass(frozen=True)
class AttentionRecord:
    alpha_low: np.ndarray  # N x D
    alpha_high: np.ndarray  # N x D
    beta: np.ndarray  # N x H x W
    spatial: Optional[np.ndarray] = None  # projected spatial features, N x D x H x W

    @classmethod
    def capture(
        cls, alpha_low: Tensor, alpha_high: Tensor, beta: Tensor, spatial: Optional[Tensor] = None
    ) -> "AttentionRecord":
        n, d = alpha_low.shape[:2]
        return cls(
            alpha_low=alpha_low.data.reshape(n, d),
            alpha_high=alpha_high.data.reshape(n, d),
            beta=beta.data[:, 0],
            spatial=spatial.data if spatial is not None else None,
        )
