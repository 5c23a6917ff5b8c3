import logging
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from app.modules.attention import AttentionHooks
from app.modules.data import Sample
from app.modules.evaluation import EvalConfig, evaluate_dataset
from app.modules.network import ModelConfig, ModelVariant, build_model
from .schemas import TrainConfig
from .trainer import train

logger = logging.getLogger(__name__)


class AblationArm(str, Enum):
    BASELINE = "baseline"
    DAFM = "dafm"
    FULL = "dafm+2dpam"


def arm_setup(arm: AblationArm, cfg: ModelConfig) -> tuple[ModelConfig, Optional[AttentionHooks]]:
    """The DAFM-only arm is the full network with the confidence map pinned to 1."""
    if arm == AblationArm.BASELINE:
        return cfg.model_copy(update={"variant": ModelVariant.BASELINE}), None
    full = cfg.model_copy(update={"variant": ModelVariant.FULL})
    if arm == AblationArm.DAFM:
        return full, AttentionHooks(beta=1.0)
    return full, None


class ArmResult(NamedTuple):
    arm: AblationArm
    seed_mious: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.seed_mious))


def run_ablation(
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    train_set: Sequence[Sample],
    val_set: Sequence[Sample],
    seeds: int = 3,
    eval_cfg: Optional[EvalConfig] = None,
    progress: bool = False,
) -> list[ArmResult]:
    """Train and score every arm once per seed; seeds are 0..seeds-1 offset by ``train_cfg.seed``."""
    eval_cfg = eval_cfg or EvalConfig(scales=[1.0])
    results = []
    for arm in AblationArm:
        arm_cfg, hooks = arm_setup(arm, model_cfg)
        mious = []
        for offset in range(seeds):
            seed = train_cfg.seed + offset
            cfg = train_cfg.model_copy(update={"seed": seed})
            model = build_model(arm_cfg, seed)
            result = train(model, train_set, cfg, hooks=hooks, progress=progress)
            report = evaluate_dataset(result.model, val_set, eval_cfg, result.mean_rgb, hooks)
            mious.append(report.iou.mean)
            logger.info(f"Ablation arm {arm.value}, seed {seed}: val mIoU {report.iou.mean:.4f}")
        results.append(ArmResult(arm=arm, seed_mious=mious))
    return results


def format_ablation(results: Sequence[ArmResult]) -> str:
    lines = ["arm\tmean_iou\tper_seed"]
    for r in results:
        lines.append(f"{r.arm.value}\t{r.mean!r}\t{','.join(repr(v) for v in r.seed_mious)}")
    return "\n".join(lines) + "\n"
