from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.modules.tensor_core import Tensor
from .types import NormMode


@dataclass(frozen=True)
class Conv2dParams:
    weight: Tensor  # O x I x kh x kw
    bias: Optional[Tensor] = None  # O
    stride: int = 1
    padding: int = 0


@dataclass(frozen=True)
class NormParams:
    scale: Tensor  # gamma, length C
    shift: Tensor  # delta, length C
    mode: NormMode = NormMode.BATCH
    epsilon: float = 1e-5
    # Running statistics are updated in place during training forwards.
    running_mean: Optional[np.ndarray] = None
    running_var: Optional[np.ndarray] = None
    momentum: float = 0.1
