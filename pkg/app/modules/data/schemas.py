from dataclasses import dataclass
from pathlib import Path
import numpy as np
from pydantic import BaseModel, Field, model_validator

from .types import ShapeKind


@dataclass
class Sample:
    image: np.ndarray  # 3 x H x W, values in [0, 255] before mean subtraction
    labels: np.ndarray  # H x W, classes 0..K-1 or the ignore label
    id: str = ""

    @property
    def size(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass(frozen=True)
class ShapeSpec:
    kind: ShapeKind
    class_id: int
    color: tuple[float, float, float]
    # rectangle: (y0, x0, y1, x1); circle: (cy, cx, r); triangle: (y0, x0, y1, x1, y2, x2)
    geometry: tuple[float, ...]


@dataclass
class SyntheticScene:
    sample: Sample
    shapes: list[ShapeSpec]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: Path
    label_path: Path
    line: int


class SynthConfig(BaseModel):
    num_classes: int = Field(default=4, ge=2)
    image_size: int = 64
    samples: int = Field(default=32, ge=0)
    shapes_min: int = Field(default=2, ge=0)
    shapes_max: int = Field(default=5, ge=0)
    noise_std: float = Field(default=6.0, ge=0.0)
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "SynthConfig":
        if self.image_size < 32 or self.image_size % 32:
            raise ValueError("image_size must be a positive multiple of 32")
        if self.shapes_min > self.shapes_max:
            raise ValueError("shapes_min must not exceed shapes_max")
        return self
