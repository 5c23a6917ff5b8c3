# app/modules/tensor_core/__init__.py
from .tensor import Tensor, Tape, Node, backward, record, current_tape
from .ops import (
    add,
    as_tensor,
    broadcast_shape,
    mean,
    mul,
    neg,
    relu,
    reshape,
    sigmoid,
    sub,
    sum,
    unbroadcast,
)
from .gradcheck import gradcheck

__all__ = [
    "Tensor",
    "Tape",
    "Node",
    "backward",
    "record",
    "current_tape",
    "add",
    "as_tensor",
    "broadcast_shape",
    "mean",
    "mul",
    "neg",
    "relu",
    "reshape",
    "sigmoid",
    "sub",
    "sum",
    "unbroadcast",
    "gradcheck",
]
