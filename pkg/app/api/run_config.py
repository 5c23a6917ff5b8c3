"""Flat ``key=value`` run configuration shared by every command."""
import logging
from pathlib import Path
from typing import List, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import settings
from app.modules.backbone import EncoderConfig
from app.modules.data import SynthConfig
from app.modules.evaluation import EvalConfig
from app.modules.network import ModelConfig, ModelVariant
from app.modules.nn_ops import NormMode
from app.modules.training import TRAIN_SCALES, TrainConfig
from app.utils.errors import ConfigError
from app.utils.helpers import PathLike, parse_float_list, parse_int_list

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    # Synthetic data
    num_classes: int = 4
    image_size: int = 64
    samples: int = 32
    shapes_min: int = 2
    shapes_max: int = 5
    noise_std: float = 6.0
    data_seed: int = 0

    # Network
    dim: int = 128
    stage_widths: List[int] = [32, 64, 128, 256]
    blocks_per_stage: List[int] = [1, 1, 1, 1]
    norm_mode: NormMode = NormMode.BATCH

    # Training
    batch_size: int = 1
    initial_lr: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 5e-4
    max_iter: int = 2000
    lr_power: float = 0.9
    crop_size: int = 64
    scale_set: List[float] = list(TRAIN_SCALES)
    flip_prob: float = 0.5
    mean_rgb: Optional[List[float]] = None
    seed: int = 0
    lambda_s: float = 0.1
    lambda_c: float = 0.4
    checkpoint_every: Optional[int] = None
    log_every: int = 10

    # Evaluation (used by `eval --config` and by ablation validation)
    eval_scales: List[float] = [1.0]
    eval_flip: bool = False

    # Paths (command-line flags take precedence)
    data_dir: Optional[Path] = None
    val_dir: Optional[Path] = None
    checkpoint: Optional[Path] = None

    @model_validator(mode="before")
    @classmethod
    def _drop_blank(cls, values):
        if isinstance(values, dict):
            return {k: v for k, v in values.items() if not (isinstance(v, str) and not v.strip())}
        return values

    @field_validator("stage_widths", "blocks_per_stage", mode="before")
    @classmethod
    def _ints(cls, value):
        return parse_int_list(value)

    @field_validator("scale_set", "eval_scales", "mean_rgb", mode="before")
    @classmethod
    def _floats(cls, value):
        return None if value is None else parse_float_list(value)

    @model_validator(mode="after")
    def _project(self) -> "RunConfig":
        # Each projection validates its own invariants.
        self.synth_config()
        self.model_settings()
        self.train_config()
        self.eval_config()
        return self

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            num_classes=self.num_classes,
            image_size=self.image_size,
            samples=self.samples,
            shapes_min=self.shapes_min,
            shapes_max=self.shapes_max,
            noise_std=self.noise_std,
            seed=self.data_seed,
        )

    def model_settings(self, baseline: bool = False) -> ModelConfig:
        return ModelConfig(
            num_classes=self.num_classes,
            dim=self.dim,
            encoder=EncoderConfig(
                stage_widths=self.stage_widths,
                blocks_per_stage=self.blocks_per_stage,
                norm_mode=self.norm_mode,
            ),
            variant=ModelVariant.BASELINE if baseline else ModelVariant.FULL,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            initial_lr=self.initial_lr,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            max_iter=self.max_iter,
            lr_power=self.lr_power,
            crop_size=self.crop_size,
            scale_set=self.scale_set,
            flip_prob=self.flip_prob,
            mean_rgb=self.mean_rgb,
            seed=self.seed,
            lambda_s=self.lambda_s,
            lambda_c=self.lambda_c,
            checkpoint_every=self.checkpoint_every,
            log_every=self.log_every,
        )

    def eval_config(self) -> EvalConfig:
        return EvalConfig(scales=self.eval_scales, flip=self.eval_flip, workers=settings.eval_workers)


def load_run_config(path: Optional[PathLike] = None) -> RunConfig:
    """Parse a run configuration file; no path means all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    values = dotenv_values(path)
    bare = [key for key, value in values.items() if value is None]
    if bare:
        raise ConfigError(f"{path}: keys without a value: {', '.join(bare)}")
    logger.debug(f"Loaded {len(values)} config keys from {path}")
    return RunConfig(**{key.strip().lower(): value for key, value in values.items()})
