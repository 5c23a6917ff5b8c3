import logging
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional, Sequence

import numpy as np

from app.modules.attention import AttentionHooks, AttentionRecord
from app.modules.backbone import INPUT_MULTIPLE
from app.modules.data import Sample, class_names
from app.modules.network import DfDamModel, forward
from app.modules.nn_ops import resize_bilinear_array, softmax
from app.modules.tensor_core import Tensor
from .metrics import accumulate, miou, pixel_accuracy
from .schemas import ConfusionMatrix, EvalConfig, EvalReport

logger = logging.getLogger(__name__)


class Prediction(NamedTuple):
    probabilities: np.ndarray  # K x H x W
    record: Optional[AttentionRecord]


def _padded_size(n: int) -> int:
    return -(-n // INPUT_MULTIPLE) * INPUT_MULTIPLE


def predict_probabilities(
    model: DfDamModel,
    image: np.ndarray,
    mean_rgb: Sequence[float],
    scale: float = 1.0,
    mirror: bool = False,
    hooks: Optional[AttentionHooks] = None,
) -> Prediction:
    """
    Class probabilities for one 3 x H x W image at one scale, back at H x W.

    The mean-subtracted image is zero padded (the mean color) up to a multiple
    of 32 and the padding is cropped off the logits before resizing back.
    """
    _, h, w = image.shape
    sh = max(1, int(np.floor(h * scale + 0.5)))
    sw = max(1, int(np.floor(w * scale + 0.5)))
    x = resize_bilinear_array(image - np.asarray(mean_rgb, dtype=np.float64).reshape(3, 1, 1), sh, sw)
    if mirror:
        x = x[:, :, ::-1]
    batch = np.zeros((1, 3, _padded_size(sh), _padded_size(sw)))
    batch[0, :, :sh, :sw] = x

    out = forward(model, Tensor(batch), training=False, hooks=hooks)
    probs = softmax(out.y_p.data)[0, :, :sh, :sw]
    if mirror:
        probs = probs[:, :, ::-1]
    return Prediction(resize_bilinear_array(probs, h, w), out.record)


def infer_multiscale_flip(
    model: DfDamModel,
    image: np.ndarray,
    cfg: EvalConfig,
    mean_rgb: Sequence[float] = (0.0, 0.0, 0.0),
    hooks: Optional[AttentionHooks] = None,
) -> np.ndarray:
    """Average probabilities over scales (and mirrors); argmax with ties to the lowest class."""
    total = None
    count = 0
    for scale in cfg.scales:
        for mirror in ((False, True) if cfg.flip else (False,)):
            probs = predict_probabilities(model, image, mean_rgb, scale, mirror, hooks).probabilities
            total = probs if total is None else total + probs
            count += 1
            logger.debug(f"Scored scale {scale} (mirror={mirror})")
    return np.argmax(total / count, axis=0)


def evaluate_dataset(
    model: DfDamModel,
    samples: Sequence[Sample],
    cfg: EvalConfig,
    mean_rgb: Sequence[float] = (0.0, 0.0, 0.0),
    hooks: Optional[AttentionHooks] = None,
    ignore: Optional[int] = None,
) -> EvalReport:
    """Score every sample; the confusion matrix is reduced in sample order."""

    def predict(sample: Sample) -> np.ndarray:
        return infer_multiscale_flip(model, sample.image, cfg, mean_rgb, hooks)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            predictions = list(pool.map(predict, samples))
    else:
        predictions = [predict(sample) for sample in samples]

    cm = ConfusionMatrix.empty(model.num_classes)
    for sample, pred in zip(samples, predictions):
        cm = accumulate(cm, pred, sample.labels, ignore)
    report = EvalReport(
        iou=miou(cm),
        pixel_accuracy=pixel_accuracy(cm),
        class_names=class_names(model.num_classes),
        samples=len(samples),
        confusion=cm,
    )
    logger.info(
        f"Evaluated {len(samples)} samples at scales {cfg.scales} (flip={cfg.flip}): "
        f"mIoU {report.iou.mean:.4f}, pixel accuracy {report.pixel_accuracy:.4f}"
    )
    return report
