from functools import lru_cache

import numpy as np

from app.modules.tensor_core import Tensor, record
from app.utils.errors import ShapeError


@lru_cache(maxsize=256)
def interpolation_matrix(n_in: int, n_out: int) -> np.ndarray:
    """
    Row-stochastic n_out x n_in matrix of half-pixel-center linear weights.

    Output index d samples source coordinate (d + 0.5) * n_in / n_out - 0.5,
    clamped to [0, n_in - 1], blended between its two integer neighbours.
    """
    if n_in < 1 or n_out < 1:
        raise ShapeError(f"resize sizes must be positive, got {n_in} -> {n_out}")
    d = np.arange(n_out)
    src = np.clip((d + 0.5) * (n_in / n_out) - 0.5, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo
    m = np.zeros((n_out, n_in))
    np.add.at(m, (d, lo), 1.0 - frac)
    np.add.at(m, (d, hi), frac)
    m.setflags(write=False)
    return m


def bilinear_resize(x: Tensor, out_h: int, out_w: int) -> Tensor:
    if x.ndim != 4:
        raise ShapeError(f"bilinear_resize expects N x C x H x W input, got {x.shape}")
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"bilinear_resize target must be positive, got {out_h}x{out_w}")
    if (out_h, out_w) == x.shape[2:]:
        return record("bilinear_resize", x.data, (x,), lambda g: (g,))
    ry = interpolation_matrix(x.shape[2], out_h)
    rx = interpolation_matrix(x.shape[3], out_w)
    out = np.matmul(np.matmul(ry, x.data), rx.T)

    def vjp(g):
        return (np.matmul(np.matmul(ry.T, g), rx),)

    return record("bilinear_resize", out, (x,), vjp)


def resize_bilinear_array(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Same sampling as ``bilinear_resize`` for plain ... x H x W arrays."""
    h, w = image.shape[-2:]
    if (out_h, out_w) == (h, w):
        return np.array(image, dtype=np.float64, copy=True)
    ry = interpolation_matrix(h, out_h)
    rx = interpolation_matrix(w, out_w)
    return np.matmul(np.matmul(ry, image.astype(np.float64)), rx.T)


def resize_nearest_array(labels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbour resize of an H x W label map (half-pixel centers)."""
    h, w = labels.shape
    rows = np.minimum(np.floor((np.arange(out_h) + 0.5) * (h / out_h)).astype(np.int64), h - 1)
    cols = np.minimum(np.floor((np.arange(out_w) + 0.5) * (w / out_w)).astype(np.int64), w - 1)
    return labels[rows[:, None], cols[None, :]]
