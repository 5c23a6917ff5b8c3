import numpy as np

from app.modules.tensor_core import Tensor, record
from app.utils.errors import ContractError, ShapeError
from .schemas import NormParams
from .types import NormMode


def normalize(x: Tensor, p: NormParams, training: bool) -> Tensor:
    """
    Per-channel normalization followed by the affine ``scale * x + shift``.

    Batch mode standardizes with the batch statistics over N x H x W while
    training (and folds them into the running statistics), and with the
    running statistics otherwise. Disabled mode applies the affine map only.
    """
    if x.ndim != 4:
        raise ShapeError(f"normalize expects N x C x H x W input, got {x.shape}")
    channels = x.shape[1]
    if p.scale.shape != (channels,) or p.shift.shape != (channels,):
        raise ShapeError(
            f"norm parameters {p.scale.shape}/{p.shift.shape} do not match {channels} channels"
        )
    if p.epsilon <= 0:
        raise ContractError(f"norm epsilon must be positive, got {p.epsilon}")

    gamma = p.scale.data.reshape(1, -1, 1, 1)
    delta = p.shift.data.reshape(1, -1, 1, 1)
    axes = (0, 2, 3)

    if p.mode == NormMode.DISABLED:
        def vjp(g):
            return g * gamma, (g * x.data).sum(axis=axes), g.sum(axis=axes)

        return record("normalize", x.data * gamma + delta, (x, p.scale, p.shift), vjp)

    if training:
        mean = x.data.mean(axis=axes, keepdims=True)
        var = x.data.var(axis=axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + p.epsilon)
        xhat = (x.data - mean) * inv_std
        if p.running_mean is not None and p.running_var is not None:
            p.running_mean[...] = (1.0 - p.momentum) * p.running_mean + p.momentum * mean.reshape(-1)
            p.running_var[...] = (1.0 - p.momentum) * p.running_var + p.momentum * var.reshape(-1)

        def vjp(g):
            gxhat = g * gamma
            gx = inv_std * (
                gxhat
                - gxhat.mean(axis=axes, keepdims=True)
                - xhat * (gxhat * xhat).mean(axis=axes, keepdims=True)
            )
            return gx, (g * xhat).sum(axis=axes), g.sum(axis=axes)

        return record("normalize", xhat * gamma + delta, (x, p.scale, p.shift), vjp)

    if p.running_mean is None or p.running_var is None:
        raise ContractError("batch-mode normalize at inference needs running statistics")
    mean = p.running_mean.reshape(1, -1, 1, 1)
    inv_std = 1.0 / np.sqrt(p.running_var.reshape(1, -1, 1, 1) + p.epsilon)
    xhat = (x.data - mean) * inv_std

    def vjp(g):
        return g * gamma * inv_std, (g * xhat).sum(axis=axes), g.sum(axis=axes)

    return record("normalize", xhat * gamma + delta, (x, p.scale, p.shift), vjp)
