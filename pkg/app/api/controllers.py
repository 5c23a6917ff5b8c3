import logging
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from app.modules.data import (
    class_names,
    generate_synthetic,
    load_manifest,
    read_ppm,
    write_pgm,
)
from app.modules.evaluation import (
    EvalConfig,
    EvalReport,
    evaluate_dataset,
    export_attention,
    format_report,
    predict_probabilities,
)
from app.modules.network import build_model
from app.modules.training import (
    ArmResult,
    TrainResult,
    load_checkpoint,
    run_ablation,
    train,
    trajectory_path,
    write_trajectory,
)
from app.modules.verification import SuiteResult, run_suites
from app.utils.errors import ContractError
from app.utils.helpers import PathLike
from .run_config import RunConfig

logger = logging.getLogger(__name__)


class LabController:
    """Orchestration behind each command; no printing happens here."""

    def generate_data(self, config: RunConfig, out_dir: PathLike) -> Path:
        return generate_synthetic(config.synth_config(), out_dir)

    def train_model(
        self, config: RunConfig, data_dir: PathLike, out: PathLike, baseline: bool = False
    ) -> TrainResult:
        """
        Train on a manifest and write the checkpoint plus the loss trajectory.

        Args:
            config: Run configuration.
            data_dir: Dataset directory or manifest file.
            out: Checkpoint path; the trajectory CSV sits next to it.
            baseline: Build the summation baseline instead of the full network.
        """
        dataset = load_manifest(data_dir)
        if not dataset:
            raise ContractError(f"no samples in {data_dir}; training needs data")
        train_cfg = config.train_config()
        model = build_model(config.model_settings(baseline), seed=train_cfg.seed)
        result = train(model, dataset, train_cfg, checkpoint_path=out)
        csv = write_trajectory(trajectory_path(out), result.trajectory)
        logger.info(f"Wrote {len(result.trajectory)} trajectory rows to {csv}")
        return result

    def evaluate(
        self,
        checkpoint: PathLike,
        data_dir: PathLike,
        scales: Optional[list[float]] = None,
        flip: bool = False,
        workers: int = 1,
    ) -> Optional[EvalReport]:
        """None when the manifest lists no samples."""
        ckpt = load_checkpoint(checkpoint)
        samples = load_manifest(data_dir)
        if not samples:
            return None
        cfg = EvalConfig(scales=scales or [1.0], flip=flip, workers=workers)
        return evaluate_dataset(ckpt.model, samples, cfg, ckpt.mean_rgb)

    def report(self, report: EvalReport) -> str:
        return format_report(report, class_names(len(report.iou.per_class)))

    def predict(
        self,
        checkpoint: PathLike,
        image_path: PathLike,
        out: PathLike,
        attn_dir: Optional[PathLike] = None,
        channels: Iterable[int] = (),
    ) -> Path:
        """Single-scale prediction written as a label PGM, optionally with attention exports."""
        ckpt = load_checkpoint(checkpoint)
        image = read_ppm(image_path)
        prediction = predict_probabilities(ckpt.model, image, ckpt.mean_rgb)
        mask = write_pgm(out, np.argmax(prediction.probabilities, axis=0))
        if attn_dir is not None:
            if prediction.record is None:
                raise ContractError("the summation baseline has no attention weights to export")
            export_attention(prediction.record, attn_dir, channels)
        logger.info(f"Wrote {image.shape[2]}x{image.shape[1]} prediction to {mask}")
        return mask

    def verify(self, names: Optional[list[str]] = None) -> list[SuiteResult]:
        return run_suites(names)

    def ablate(
        self, config: RunConfig, data_dir: PathLike, val_dir: PathLike, seeds: int
    ) -> list[ArmResult]:
        train_set = load_manifest(data_dir)
        val_set = load_manifest(val_dir)
        if not train_set or not val_set:
            raise ContractError("ablation needs non-empty training and validation sets")
        return run_ablation(
            config.model_settings(),
            config.train_config(),
            train_set,
            val_set,
            seeds=seeds,
            eval_cfg=config.eval_config(),
        )


lab_controller = LabController()
