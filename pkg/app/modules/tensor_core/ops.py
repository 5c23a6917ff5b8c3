"""Elementwise and reduction ops with broadcasting over size-1 axes."""
from typing import Union

import numpy as np

from app.utils.errors import ShapeError
from .tensor import Tensor, record

Operand = Union[Tensor, np.ndarray, float, int]

# Keeps sigmoid strictly inside (0, 1) even where float64 would round to an end.
_SIGMOID_HIGH = np.nextafter(1.0, 0.0)
_SIGMOID_LOW = np.finfo(np.float64).tiny


def as_tensor(value: Operand) -> Tensor:
    """Pass tensors through; wrap anything else as a constant."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def broadcast_shape(a: tuple, b: tuple) -> tuple:
    """Result shape of combining ``a`` and ``b``; axes must match or be 1."""
    rank = max(len(a), len(b))
    pa = (1,) * (rank - len(a)) + tuple(a)
    pb = (1,) * (rank - len(b)) + tuple(b)
    out = []
    for da, db in zip(pa, pb):
        if da == db or db == 1:
            out.append(da)
        elif da == 1:
            out.append(db)
        else:
            raise ShapeError(f"shapes {tuple(a)} and {tuple(b)} are not broadcast-compatible")
    return tuple(out)


def unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` back down to ``shape`` over the axes broadcasting expanded."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, dim in enumerate(shape) if dim == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return record("add", a.data + b.data, (a, b), vjp)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return record("sub", a.data - b.data, (a, b), vjp)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    broadcast_shape(a.shape, b.shape)

    def vjp(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return record("mul", a.data * b.data, (a, b), vjp)


def neg(x: Operand) -> Tensor:
    x = as_tensor(x)
    return record("neg", -x.data, (x,), lambda g: (-g,))


def sigmoid(x: Operand) -> Tensor:
    x = as_tensor(x)
    e = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    y = np.clip(y, _SIGMOID_LOW, _SIGMOID_HIGH)

    def vjp(g):
        return (g * y * (1.0 - y),)

    return record("sigmoid", y, (x,), vjp)


def relu(x: Operand) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def vjp(g):
        return (g * mask,)

    return record("relu", np.where(mask, x.data, 0.0), (x,), vjp)


def sum(x: Operand) -> Tensor:  # noqa: A001 - mirrors the numpy name
    x = as_tensor(x)

    def vjp(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", np.asarray(x.data.sum()), (x,), vjp)


def mean(x: Operand) -> Tensor:
    x = as_tensor(x)
    count = x.data.size

    def vjp(g):
        return (np.full(x.shape, float(g) / count),)

    return record("mean", np.asarray(x.data.mean()), (x,), vjp)


def reshape(x: Operand, shape: tuple) -> Tensor:
    x = as_tensor(x)
    try:
        out = x.data.reshape(shape)
    except ValueError as e:
        raise ShapeError(f"cannot reshape {x.shape} to {tuple(shape)}") from e

    def vjp(g):
        return (g.reshape(x.shape),)

    return record("reshape", out, (x,), vjp)
