import logging
from typing import Mapping, Optional

import numpy as np

from app.modules.nn_ops import ParamStore
from app.modules.tensor_core import Tensor
from app.utils.errors import ContractError
from .schemas import OptimizerState, TrainConfig

logger = logging.getLogger(__name__)


def poly_lr(iteration: int, cfg: TrainConfig) -> float:
    """initial_lr * (1 - iter / max_iter) ** lr_power."""
    if iteration < 0 or iteration > cfg.max_iter:
        raise ContractError(f"iteration {iteration} outside 0..{cfg.max_iter}")
    return cfg.initial_lr * (1.0 - iteration / cfg.max_iter) ** cfg.lr_power


def decays(name: str) -> bool:
    """Weight decay touches convolution weights only."""
    return name.endswith(".weight")


def init_optimizer(params: ParamStore) -> OptimizerState:
    return OptimizerState(velocity={name: np.zeros(p.shape) for name, p in params.items()})


def sgd_step(
    params: ParamStore,
    grads: Mapping[str, Optional[np.ndarray]],
    state: OptimizerState,
    lr: float,
    cfg: TrainConfig,
) -> tuple[ParamStore, OptimizerState]:
    """
    One momentum step: v <- momentum * v + (g + weight_decay * p); p <- p - lr * v.

    Parameters missing from ``grads`` (unreached by the loss) get a zero
    gradient. Returns fresh parameter tensors and a new state.
    """
    if lr < 0:
        raise ContractError(f"learning rate must be non-negative, got {lr}")
    new_params: ParamStore = {}
    velocity: dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = grads.get(name)
        g = np.zeros(p.shape) if g is None else np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise ContractError(f"gradient for {name!r} has shape {g.shape}, parameter has {p.shape}")
        if cfg.weight_decay and decays(name):
            g = g + cfg.weight_decay * p.data
        v = state.velocity.get(name)
        if v is None:
            v = np.zeros(p.shape)
        elif v.shape != p.shape:
            raise ContractError(f"velocity for {name!r} has shape {v.shape}, parameter has {p.shape}")
        v = cfg.momentum * v + g
        velocity[name] = v
        new_params[name] = Tensor(p.data - lr * v, requires_grad=True)
    return new_params, OptimizerState(velocity=velocity, iteration=state.iteration + 1)
