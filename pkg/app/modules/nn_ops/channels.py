import numpy as np

from app.modules.tensor_core import Tensor, record
from app.utils.errors import ShapeError


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    """Stack ``a`` then ``b`` along the channel axis."""
    if a.ndim != 4 or b.ndim != 4:
        raise ShapeError(f"concat_channels expects 4-d tensors, got {a.shape} and {b.shape}")
    if (a.shape[0], *a.shape[2:]) != (b.shape[0], *b.shape[2:]):
        raise ShapeError(f"concat_channels batch/spatial mismatch: {a.shape} vs {b.shape}")
    split = a.shape[1]

    def vjp(g):
        return g[:, :split], g[:, split:]

    return record("concat_channels", np.concatenate([a.data, b.data], axis=1), (a, b), vjp)


def slice_channels(x: Tensor, start: int, stop: int) -> Tensor:
    if x.ndim != 4 or not 0 <= start <= stop <= x.shape[1]:
        raise ShapeError(f"cannot slice channels [{start}:{stop}] of {x.shape}")

    def vjp(g):
        gx = np.zeros(x.shape)
        gx[:, start:stop] = g
        return (gx,)

    return record("slice_channels", x.data[:, start:stop].copy(), (x,), vjp)
