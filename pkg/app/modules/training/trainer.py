import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
from tqdm import tqdm

from app.modules.attention import AttentionHooks
from app.modules.data import Sample, dataset_mean_rgb
from app.modules.network import DfDamModel, forward, joint_loss
from app.modules.tensor_core import Tape, Tensor, backward
from app.utils.errors import ContractError, NumericalError
from app.utils.helpers import PathLike, atomic_write_text, format_float
from .augment import augment
from .checkpoint import save_checkpoint
from .optimizer import init_optimizer, poly_lr, sgd_step
from .schemas import TrainConfig, TrainResult, TrajectoryRow

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = "iter,lr,L_p,L_c,L_s,joint"


def sample_order(n: int, rng: np.random.Generator) -> Iterator[int]:
    """Endless stream of indices: a fresh permutation each pass."""
    while True:
        yield from (int(i) for i in rng.permutation(n))


def trajectory_path(checkpoint_path: PathLike) -> Path:
    return Path(checkpoint_path).with_suffix(".csv")


def write_trajectory(path: PathLike, rows: Sequence[TrajectoryRow]) -> Path:
    lines = [TRAJECTORY_HEADER]
    lines += [",".join([str(row.iter)] + [format_float(v) for v in row[1:]]) for row in rows]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def train(
    model: DfDamModel,
    dataset: Sequence[Sample],
    cfg: TrainConfig,
    checkpoint_path: Optional[PathLike] = None,
    hooks: Optional[AttentionHooks] = None,
    progress: bool = True,
) -> TrainResult:
    """
    Run ``cfg.max_iter`` SGD iterations of augment, forward, joint loss and backward.

    The input model is left untouched: training starts from detached copies
    of its parameters and normalization buffers, so repeated calls on the same
    model follow the same trajectory. With ``checkpoint_path`` set, a
    checkpoint is written every ``cfg.checkpoint_interval`` iterations and
    after the last one.
    """
    if not dataset:
        raise ContractError("cannot train on an empty dataset")
    mean_rgb = tuple(cfg.mean_rgb) if cfg.mean_rgb is not None else dataset_mean_rgb(dataset)
    rng = np.random.default_rng(cfg.seed)
    order = sample_order(len(dataset), rng)
    lw = cfg.loss_weights

    model = replace(model, buffers={name: buf.copy() for name, buf in model.buffers.items()})
    params = {name: Tensor(p.data, requires_grad=True) for name, p in model.params.items()}
    state = init_optimizer(params)
    trajectory: list[TrajectoryRow] = []
    logger.info(
        f"Training {model.config.variant.value} model for {cfg.max_iter} iterations "
        f"on {len(dataset)} samples (batch {cfg.batch_size}, crop {cfg.crop_size})"
    )

    iterations = tqdm(range(cfg.max_iter), desc="train", file=sys.stderr, disable=not progress)
    for it in iterations:
        lr = poly_lr(it, cfg)
        batch = [augment(dataset[next(order)], rng, cfg, mean_rgb) for _ in range(cfg.batch_size)]
        images = Tensor(np.stack([s.image for s in batch]))
        labels = np.stack([s.labels for s in batch])

        current = model.with_params(params)
        with Tape() as tape:
            out = forward(current, images, training=True, hooks=hooks)
            losses = joint_loss(out.y_p, out.y_c, out.y_s, labels, lw)
        joint = losses.total.item()
        if not np.isfinite(joint):
            logger.error(f"Joint loss became {joint} at iteration {it + 1}")
            raise NumericalError(f"non-finite joint loss ({joint})", it + 1)

        backward(losses.total, tape)
        params, state = sgd_step(params, {name: p.grad for name, p in params.items()}, state, lr, cfg)

        row = TrajectoryRow(
            iter=it + 1,
            lr=lr,
            L_p=losses.principal.item(),
            L_c=losses.context.item(),
            L_s=losses.spatial.item(),
            joint=joint,
        )
        trajectory.append(row)
        iterations.set_postfix(loss=f"{joint:.4f}")
        logger.debug(f"iter {row.iter}: lr={lr:.6g} L_p={row.L_p:.6f} L_c={row.L_c:.6f} L_s={row.L_s:.6f}")
        if row.iter % cfg.log_every == 0:
            logger.info(f"iter {row.iter}/{cfg.max_iter}: joint loss {joint:.5f}, lr {lr:.6g}")

        if checkpoint_path is not None and (
            row.iter % cfg.checkpoint_interval == 0 or row.iter == cfg.max_iter
        ):
            save_checkpoint(model.with_params(params), state, checkpoint_path, mean_rgb, cfg.seed)

    trained = model.with_params(params)
    logger.info(
        f"Finished training: joint loss {trajectory[0].joint:.5f} -> {trajectory[-1].joint:.5f}"
    )
    return TrainResult(model=trained, state=state, trajectory=trajectory, mean_rgb=mean_rgb)
