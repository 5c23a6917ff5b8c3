"""Named-parameter helpers shared by the encoder, attention modules and heads."""
import zlib
from typing import Mapping, MutableMapping

import numpy as np

from app.modules.tensor_core import Tensor
from app.utils.errors import ContractError
from .schemas import Conv2dParams, NormParams
from .types import NormMode

ParamStore = MutableMapping[str, Tensor]
BufferStore = MutableMapping[str, np.ndarray]


def param_rng(seed: int, name: str) -> np.random.Generator:
    """Independent PCG64 stream per (seed, parameter name).

    Keying on the name keeps a parameter's initial value independent of which
    other parameters a model variant happens to create.
    """
    return np.random.default_rng([seed, zlib.crc32(name.encode("utf-8"))])


def init_conv(
    params: ParamStore, seed: int, name: str, out_ch: int, in_ch: int, k: int, bias: bool
) -> None:
    fan_in = in_ch * k * k
    std = np.sqrt(2.0 / fan_in)
    weight = param_rng(seed, f"{name}.weight").normal(0.0, std, size=(out_ch, in_ch, k, k))
    params[f"{name}.weight"] = Tensor(weight, requires_grad=True)
    if bias:
        params[f"{name}.bias"] = Tensor(np.zeros(out_ch), requires_grad=True)


def init_norm(
    params: ParamStore,
    buffers: BufferStore,
    name: str,
    channels: int,
    mode: NormMode,
    zero_scale: bool = False,
) -> None:
    scale = np.zeros(channels) if zero_scale else np.ones(channels)
    params[f"{name}.scale"] = Tensor(scale, requires_grad=True)
    params[f"{name}.shift"] = Tensor(np.zeros(channels), requires_grad=True)
    if mode == NormMode.BATCH:
        buffers[f"{name}.running_mean"] = np.zeros(channels)
        buffers[f"{name}.running_var"] = np.ones(channels)


def _lookup(store: Mapping, key: str):
    try:
        return store[key]
    except KeyError:
        raise ContractError(f"missing parameter {key!r}") from None


def conv_params(params: Mapping[str, Tensor], name: str, stride: int = 1, padding: int = 0) -> Conv2dParams:
    return Conv2dParams(
        weight=_lookup(params, f"{name}.weight"),
        bias=params.get(f"{name}.bias"),
        stride=stride,
        padding=padding,
    )


def norm_params(
    params: Mapping[str, Tensor], buffers: Mapping[str, np.ndarray], name: str, mode: NormMode
) -> NormParams:
    if mode == NormMode.BATCH:
        return NormParams(
            scale=_lookup(params, f"{name}.scale"),
            shift=_lookup(params, f"{name}.shift"),
            mode=mode,
            running_mean=_lookup(buffers, f"{name}.running_mean"),
            running_var=_lookup(buffers, f"{name}.running_var"),
        )
    return NormParams(
        scale=_lookup(params, f"{name}.scale"),
        shift=_lookup(params, f"{name}.shift"),
        mode=mode,
    )
