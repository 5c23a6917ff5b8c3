"""
Deterministic synthetic scenes: a textured background (class 0) overlaid with
rectangles, circles and triangles (classes 1..K-1), later shapes occluding
earlier ones, plus optional Gaussian pixel noise.

Every sample draws from its own PCG64 stream seeded with ``[seed, index]``,
so a (seed, index) pair always yields the same bytes.
"""
import logging
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from app.utils.helpers import PathLike
from .manifest import MANIFEST_NAME, write_manifest
from .netpbm import write_pgm, write_ppm
from .schemas import Sample, ShapeSpec, SynthConfig, SyntheticScene
from .types import ShapeKind

logger = logging.getLogger(__name__)

BACKGROUND_COLOR = (96.0, 112.0, 88.0)
_PALETTE = (
    (220.0, 60.0, 50.0),
    (50.0, 90.0, 220.0),
    (240.0, 200.0, 40.0),
    (170.0, 60.0, 200.0),
    (40.0, 200.0, 200.0),
    (250.0, 130.0, 20.0),
)
_KINDS = (ShapeKind.RECTANGLE, ShapeKind.CIRCLE, ShapeKind.TRIANGLE)
COLOR_JITTER = 10.0


def shape_kind(class_id: int) -> ShapeKind:
    return _KINDS[(class_id - 1) % len(_KINDS)]


def class_color(class_id: int) -> tuple[float, float, float]:
    if class_id - 1 < len(_PALETTE):
        return _PALETTE[class_id - 1]
    return (
        float((class_id * 97) % 200 + 30),
        float((class_id * 57) % 200 + 30),
        float((class_id * 151) % 200 + 30),
    )


def class_names(num_classes: int) -> list[str]:
    names = ["background"]
    for class_id in range(1, num_classes):
        kind = shape_kind(class_id).value
        names.append(kind if class_id <= len(_KINDS) else f"{kind}_{class_id}")
    return names


def shape_mask(shape: ShapeSpec, size: int) -> np.ndarray:
    """Pixels whose centers fall inside ``shape``."""
    py, px = np.mgrid[0:size, 0:size] + 0.5
    g = shape.geometry
    if shape.kind == ShapeKind.RECTANGLE:
        y0, x0, y1, x1 = g
        return (py >= y0) & (py < y1) & (px >= x0) & (px < x1)
    if shape.kind == ShapeKind.CIRCLE:
        cy, cx, r = g
        return (py - cy) ** 2 + (px - cx) ** 2 <= r * r
    (ay, ax), (by, bx), (cy, cx) = (g[0], g[1]), (g[2], g[3]), (g[4], g[5])

    def side(uy, ux, vy, vx):
        return (px - vx) * (uy - vy) - (ux - vx) * (py - vy)

    d1, d2, d3 = side(ay, ax, by, bx), side(by, bx, cy, cx), side(cy, cx, ay, ax)
    has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(has_neg & has_pos)


def render_labels(shapes: Sequence[ShapeSpec], size: int) -> np.ndarray:
    """Label map of the topmost covering shape per pixel (0 where uncovered)."""
    labels = np.zeros((size, size), dtype=np.int64)
    for shape in shapes:
        labels[shape_mask(shape, size)] = shape.class_id
    return labels


def _background(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size] / size
    freq = rng.uniform(1.0, 4.0, size=2)
    phase = rng.uniform(0.0, 2 * np.pi, size=2)
    texture = 14.0 * np.sin(2 * np.pi * freq[0] * yy + phase[0]) * np.cos(
        2 * np.pi * freq[1] * xx + phase[1]
    )
    base = np.asarray(BACKGROUND_COLOR).reshape(3, 1, 1)
    return base + texture[None]


def _random_shape(rng: np.random.Generator, class_id: int, size: int) -> ShapeSpec:
    kind = shape_kind(class_id)
    color = tuple(float(c) for c in np.asarray(class_color(class_id)) + rng.uniform(-COLOR_JITTER, COLOR_JITTER, 3))
    if kind == ShapeKind.RECTANGLE:
        h, w = rng.uniform(0.15 * size, 0.4 * size, size=2)
        y0, x0 = rng.uniform(0.0, size - h), rng.uniform(0.0, size - w)
        geometry = (y0, x0, y0 + h, x0 + w)
    elif kind == ShapeKind.CIRCLE:
        r = rng.uniform(0.08 * size, 0.2 * size)
        cy, cx = rng.uniform(r, size - r, size=2)
        geometry = (cy, cx, r)
    else:
        r = rng.uniform(0.12 * size, 0.25 * size)
        cy, cx = rng.uniform(r, size - r, size=2)
        angles = rng.uniform(0.0, 2 * np.pi) + 2 * np.pi * np.arange(3) / 3 + rng.uniform(-0.3, 0.3, 3)
        geometry = tuple(
            float(v) for a in angles for v in (cy + r * np.sin(a), cx + r * np.cos(a))
        )
    return ShapeSpec(kind=kind, class_id=class_id, color=color, geometry=tuple(float(v) for v in geometry))


def generate_scene(cfg: SynthConfig, index: int) -> SyntheticScene:
    rng = np.random.default_rng([cfg.seed, index])
    size = cfg.image_size
    image = _background(rng, size)
    count = int(rng.integers(cfg.shapes_min, cfg.shapes_max + 1))
    shapes = [_random_shape(rng, int(rng.integers(1, cfg.num_classes)), size) for _ in range(count)]
    for shape in shapes:
        image[:, shape_mask(shape, size)] = np.asarray(shape.color).reshape(3, 1)
    if cfg.noise_std > 0:
        image = image + rng.normal(0.0, cfg.noise_std, size=image.shape)
    # Store exactly what the 8-bit codec can represent.
    image = np.floor(np.clip(image, 0.0, 255.0) + 0.5)
    sample = Sample(image=image, labels=render_labels(shapes, size), id=f"{index:05d}")
    return SyntheticScene(sample=sample, shapes=shapes)


def iter_scenes(cfg: SynthConfig) -> Iterator[SyntheticScene]:
    for index in range(cfg.samples):
        yield generate_scene(cfg, index)


def generate_synthetic(cfg: SynthConfig, out_dir: PathLike) -> Path:
    """Write ``images/*.ppm``, ``labels/*.pgm`` and the manifest; return its path."""
    root = Path(out_dir)
    rows = []
    for scene in iter_scenes(cfg):
        sample = scene.sample
        image_rel = Path("images") / f"{sample.id}.ppm"
        label_rel = Path("labels") / f"{sample.id}.pgm"
        write_ppm(root / image_rel, sample.image)
        write_pgm(root / label_rel, sample.labels)
        rows.append((sample.id, image_rel, label_rel))
    manifest = write_manifest(root / MANIFEST_NAME, rows)
    logger.info(f"Generated {len(rows)} synthetic samples ({cfg.image_size}px, K={cfg.num_classes}) in {root}")
    return manifest


def dataset_mean_rgb(samples: Sequence[Sample]) -> tuple[float, float, float]:
    """Per-channel pixel mean over a dataset."""
    if not samples:
        return BACKGROUND_COLOR
    totals = np.zeros(3)
    count = 0
    for sample in samples:
        totals += sample.image.reshape(3, -1).sum(axis=1)
        count += sample.image.shape[1] * sample.image.shape[2]
    return tuple(float(v) for v in totals / count)
