import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.modules.tensor_core import Tensor, record
from app.utils.errors import ShapeError
from .schemas import Conv2dParams


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _check_conv(x_shape: tuple, w_shape: tuple, stride: int, padding: int) -> tuple[int, int]:
    if len(x_shape) != 4:
        raise ShapeError(f"conv2d expects N x C x H x W input, got {x_shape}")
    if len(w_shape) != 4 or w_shape[2] < 1 or w_shape[3] < 1:
        raise ShapeError(f"conv2d expects O x I x kh x kw weight, got {w_shape}")
    if x_shape[1] != w_shape[1]:
        raise ShapeError(f"conv2d channel mismatch: input {x_shape} vs weight {w_shape}")
    if stride < 1 or padding < 0:
        raise ShapeError(f"conv2d needs stride >= 1 and padding >= 0, got {stride}/{padding}")
    out_h = conv_output_size(x_shape[2], w_shape[2], stride, padding)
    out_w = conv_output_size(x_shape[3], w_shape[3], stride, padding)
    if out_h < 1 or out_w < 1:
        raise ShapeError(
            f"conv2d output would be {out_h}x{out_w} for input {x_shape} and weight {w_shape}"
        )
    return out_h, out_w


def conv2d(x: Tensor, p: Conv2dParams) -> Tensor:
    """Zero-padded cross-correlation (no kernel flip), im2col via strided windows."""
    w = p.weight
    s, pad = p.stride, p.padding
    out_h, out_w = _check_conv(x.shape, w.shape, s, pad)
    kh, kw = w.shape[2], w.shape[3]
    if p.bias is not None and p.bias.shape != (w.shape[0],):
        raise ShapeError(f"conv2d bias {p.bias.shape} does not match {w.shape[0]} outputs")

    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    # N x C x Ho x Wo x kh x kw
    cols = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::s, ::s]
    out = np.tensordot(cols, w.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if p.bias is not None:
        out = out + p.bias.data.reshape(1, -1, 1, 1)

    def vjp(g):
        gw = np.tensordot(g, cols, axes=([0, 2, 3], [0, 2, 3]))
        gxp = np.zeros(xp.shape)
        span_h = s * (out_h - 1) + 1
        span_w = s * (out_w - 1) + 1
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i:i + span_h:s, j:j + span_w:s] += np.einsum(
                    "nohw,oc->nchw", g, w.data[:, :, i, j]
                )
        gx = gxp[:, :, pad:pad + x.shape[2], pad:pad + x.shape[3]] if pad else gxp
        gb = g.sum(axis=(0, 2, 3)) if p.bias is not None else None
        return gx, gw, gb

    inputs = (x, w, p.bias) if p.bias is not None else (x, w)
    return record("conv2d", out, inputs, vjp)


def naive_conv2d(
    x: np.ndarray, weight: np.ndarray, bias=None, stride: int = 1, padding: int = 0
) -> np.ndarray:
    """Direct loop reference used to check ``conv2d``."""
    out_h, out_w = _check_conv(x.shape, weight.shape, stride, padding)
    n, c, h, w = x.shape
    o, _, kh, kw = weight.shape
    out = np.zeros((n, o, out_h, out_w))
    for b in range(n):
        for oc in range(o):
            for y in range(out_h):
                for xx in range(out_w):
                    acc = 0.0 if bias is None else float(bias[oc])
                    for ic in range(c):
                        for i in range(kh):
                            for j in range(kw):
                                r = y * stride + i - padding
                                q = xx * stride + j - padding
                                if 0 <= r < h and 0 <= q < w:
                                    acc += x[b, ic, r, q] * weight[oc, ic, i, j]
                    out[b, oc, y, xx] = acc
    return out
