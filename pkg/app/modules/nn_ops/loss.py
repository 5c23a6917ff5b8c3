from typing import Optional

import numpy as np

from app.config import settings
from app.modules.tensor_core import Tensor, record
from app.utils.errors import ContractError, LabelError, ShapeError


def _log_softmax(logits: np.ndarray, axis: int = 1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def softmax(logits: np.ndarray, axis: int = 1) -> np.ndarray:
    """Class probabilities for an N x K x H x W logit array (no graph)."""
    return np.exp(_log_softmax(np.asarray(logits, dtype=np.float64), axis=axis))


def softmax_ce_loss(logits: Tensor, labels: np.ndarray, ignore: Optional[int] = None) -> Tensor:
    """
    Mean over non-ignored pixels of -log softmax(logits)[label].

    Args:
        logits: N x K x H x W.
        labels: N x H x W integer class map; ``ignore`` marks unscored pixels.
        ignore: Ignore label, defaults to ``settings.ignore_label`` (255).
    """
    if ignore is None:
        ignore = settings.ignore_label
    labels = np.asarray(labels)
    if logits.ndim != 4:
        raise ShapeError(f"softmax_ce_loss expects N x K x H x W logits, got {logits.shape}")
    n, k, h, w = logits.shape
    if labels.shape != (n, h, w):
        raise ShapeError(f"labels {labels.shape} do not match logits {logits.shape}")

    valid = labels != ignore
    count = int(valid.sum())
    if count == 0:
        raise ContractError("no valid pixels")
    bad = valid & ((labels < 0) | (labels >= k))
    if bad.any():
        offender = int(labels[bad].flat[0])
        raise LabelError(f"label {offender} outside [0, {k}) and not the ignore label {ignore}")

    safe = np.where(valid, labels, 0).astype(np.int64)[:, None]
    log_p = _log_softmax(logits.data)
    picked = np.take_along_axis(log_p, safe, axis=1)[:, 0]
    loss = -picked[valid].sum() / count

    def vjp(g):
        grad = np.exp(log_p)
        np.put_along_axis(grad, safe, np.take_along_axis(grad, safe, axis=1) - 1.0, axis=1)
        grad *= valid[:, None]
        return (grad * (float(g) / count),)

    return record("softmax_ce_loss", np.asarray(loss), (logits,), vjp)
