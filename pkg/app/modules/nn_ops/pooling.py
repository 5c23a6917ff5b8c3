import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.modules.tensor_core import Tensor, record
from app.utils.errors import ShapeError


def max_pool2d(x: Tensor, k: int = 2, stride: int = 2) -> Tensor:
    """Window maximum; the gradient goes to the first maximum in row-major order."""
    if x.ndim != 4:
        raise ShapeError(f"max_pool2d expects N x C x H x W input, got {x.shape}")
    n, c, h, w = x.shape
    if k > h or k > w:
        raise ShapeError(f"pool window {k}x{k} is larger than input {h}x{w}")
    out_h = (h - k) // stride + 1
    out_w = (w - k) // stride + 1

    windows = sliding_window_view(x.data, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    flat = windows.reshape(n, c, out_h, out_w, k * k)
    winner = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, winner[..., None], axis=-1)[..., 0]

    def vjp(g):
        gx = np.zeros(x.shape)
        span_h = stride * (out_h - 1) + 1
        span_w = stride * (out_w - 1) + 1
        for tap in range(k * k):
            i, j = divmod(tap, k)
            gx[:, :, i:i + span_h:stride, j:j + span_w:stride] += np.where(winner == tap, g, 0.0)
        return (gx,)

    return record("max_pool2d", out, (x,), vjp)


def global_avg_pool(x: Tensor) -> Tensor:
    """Spatial mean per channel, N x C x 1 x 1."""
    if x.ndim != 4:
        raise ShapeError(f"global_avg_pool expects N x C x H x W input, got {x.shape}")
    area = x.shape[2] * x.shape[3]

    def vjp(g):
        return (np.broadcast_to(g / area, x.shape).copy(),)

    return record("global_avg_pool", x.data.mean(axis=(2, 3), keepdims=True), (x,), vjp)
