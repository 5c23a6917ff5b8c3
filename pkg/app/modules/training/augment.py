from typing import Optional, Sequence

import numpy as np

from app.config import settings
from app.modules.data import Sample
from app.modules.nn_ops import resize_bilinear_array, resize_nearest_array
from .schemas import TrainConfig


def scaled_size(h: int, w: int, scale: float) -> tuple[int, int]:
    return max(1, int(np.floor(h * scale + 0.5))), max(1, int(np.floor(w * scale + 0.5)))


def augment(
    sample: Sample,
    rng: np.random.Generator,
    cfg: TrainConfig,
    mean_rgb: Optional[Sequence[float]] = None,
    ignore: Optional[int] = None,
) -> Sample:
    """
    Random scale, horizontal flip and crop, then mean subtraction.

    The image is resized bilinearly and the labels by nearest neighbour. Crops
    larger than the scaled sample are padded with the mean color (zero after
    subtraction) and the ignore label. Every call draws the same number of
    values from ``rng`` so the stream stays aligned across samples.
    """
    ignore = settings.ignore_label if ignore is None else ignore
    mean = np.asarray(mean_rgb if mean_rgb is not None else (cfg.mean_rgb or (0.0, 0.0, 0.0)), dtype=np.float64)
    mean = mean.reshape(3, 1, 1)

    h, w = sample.size
    scale = cfg.scale_set[int(rng.integers(len(cfg.scale_set)))]
    sh, sw = scaled_size(h, w, scale)
    image = resize_bilinear_array(sample.image, sh, sw)
    labels = resize_nearest_array(sample.labels, sh, sw)

    if rng.random() < cfg.flip_prob:
        image = image[:, :, ::-1]
        labels = labels[:, ::-1]

    crop = cfg.crop_size
    ph, pw = max(crop, sh), max(crop, sw)
    canvas = np.broadcast_to(mean, (3, ph, pw)).copy()
    canvas[:, :sh, :sw] = image
    label_canvas = np.full((ph, pw), ignore, dtype=np.int64)
    label_canvas[:sh, :sw] = labels

    y0 = int(rng.integers(ph - crop + 1))
    x0 = int(rng.integers(pw - crop + 1))
    image = canvas[:, y0:y0 + crop, x0:x0 + crop] - mean
    labels = label_canvas[y0:y0 + crop, x0:x0 + crop]
    return Sample(image=np.ascontiguousarray(image), labels=np.ascontiguousarray(labels), id=sample.id)
