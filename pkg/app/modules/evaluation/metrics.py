import logging
from typing import Optional, Sequence

import numpy as np

from app.config import settings
from app.utils.errors import ContractError, ShapeError
from app.utils.helpers import format_float
from .schemas import ConfusionMatrix, EvalReport, IouReport

logger = logging.getLogger(__name__)


def accumulate(
    cm: ConfusionMatrix,
    pred: np.ndarray,
    gt: np.ndarray,
    ignore: Optional[int] = None,
) -> ConfusionMatrix:
    """Return ``cm`` plus the counts of every non-ignored pixel."""
    ignore = settings.ignore_label if ignore is None else ignore
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise ShapeError(f"prediction {pred.shape} and ground truth {gt.shape} differ in shape")
    k = cm.num_classes
    valid = gt != ignore
    gt_v = gt[valid].astype(np.int64)
    pred_v = pred[valid].astype(np.int64)
    for name, values in (("ground-truth", gt_v), ("predicted", pred_v)):
        if values.size and (values.min() < 0 or values.max() >= k):
            raise ContractError(f"{name} class outside 0..{k - 1}")
    counts = np.bincount(gt_v * k + pred_v, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(cm.counts + counts)


def miou(cm: ConfusionMatrix) -> IouReport:
    """Per-class TP / (TP + FP + FN); classes with an empty union stay out of the mean."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - tp
    present = union > 0
    if not present.any():
        raise ContractError("no scored pixels")
    iou = np.full(cm.num_classes, np.nan)
    iou[present] = tp[present] / union[present]
    absent = np.flatnonzero(~present)
    if absent.size:
        logger.warning(f"Classes {absent.tolist()} never occur; left out of the mean IoU")
    return IouReport(per_class=iou.tolist(), mean=float(iou[present].mean()))


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ContractError("no scored pixels")
    return float(np.trace(cm.counts) / cm.total)


def format_report(
    report: EvalReport,
    class_names: Optional[Sequence[str]] = None,
    include_accuracy: bool = False,
) -> str:
    """``name<TAB>iou`` per class, then ``mean_iou<TAB>value``."""
    names = list(class_names or report.class_names)
    lines = [f"{name}\t{format_float(iou)}" for name, iou in zip(names, report.iou.per_class)]
    lines.append(f"mean_iou\t{format_float(report.iou.mean)}")
    if include_accuracy:
        lines.append(f"pixel_accuracy\t{format_float(report.pixel_accuracy)}")
    return "\n".join(lines) + "\n"
