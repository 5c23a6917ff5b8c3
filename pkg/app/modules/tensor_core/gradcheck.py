import logging
from typing import Callable, Optional

import numpy as np

from app.utils.errors import ContractError
from .tensor import Tensor, backward

logger = logging.getLogger(__name__)


def gradcheck(
    f: Callable[[Tensor], Tensor],
    x: Tensor,
    h: float = 1e-5,
    samples: Optional[int] = None,
    seed: int = 0,
) -> float:
    """
    Compare the analytic gradient of a scalar map against central differences.

    Args:
        f: Maps a tensor shaped like ``x`` to a scalar tensor.
        x: Point to check at.
        h: Finite-difference step.
        samples: When set, only this many coordinates (seeded draw) are compared.
        seed: Seed for the coordinate draw.

    Returns:
        Max over compared coordinates of |analytic - numeric| / max(1, |numeric|).
    """
    point = Tensor(x.data, requires_grad=True)
    loss = f(point)
    if loss.data.size != 1:
        raise ContractError(f"gradcheck needs a scalar-valued map, got shape {loss.shape}")
    backward(loss)
    analytic = point.grad if point.grad is not None else np.zeros(point.shape)
    analytic = analytic.reshape(-1)

    base = x.data.reshape(-1)
    indices = np.arange(base.size)
    if samples is not None and samples < base.size:
        indices = np.sort(np.random.default_rng(seed).choice(base.size, size=samples, replace=False))

    worst = 0.0
    for i in indices:
        bumped = base.copy()
        bumped[i] += h
        f_plus = f(Tensor(bumped.reshape(x.shape))).item()
        bumped[i] = base[i] - h
        f_minus = f(Tensor(bumped.reshape(x.shape))).item()
        numeric = (f_plus - f_minus) / (2.0 * h)
        error = abs(analytic[i] - numeric) / max(1.0, abs(numeric))
        worst = max(worst, error)
    logger.debug(f"gradcheck compared {len(indices)} coordinates, max relative error {worst:.3e}")
    return worst
