from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.utils.helpers import parse_float_list

EVAL_SCALES = [0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]


class EvalConfig(BaseModel):
    scales: List[float] = Field(default_factory=lambda: list(EVAL_SCALES))
    flip: bool = False
    workers: int = Field(default=1, ge=1)

    @field_validator("scales", mode="before")
    @classmethod
    def _split(cls, value):
        return parse_float_list(value)

    @field_validator("scales")
    @classmethod
    def _positive(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("scales must not be empty")
        if any(s <= 0 for s in value):
            raise ValueError("every evaluation scale must be positive")
        return value


@dataclass
class ConfusionMatrix:
    """K x K pixel counts; rows are ground truth, columns are predictions."""

    counts: np.ndarray

    @classmethod
    def empty(cls, num_classes: int) -> "ConfusionMatrix":
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.counts + other.counts)


class IouReport(NamedTuple):
    per_class: List[float]  # NaN where the class has an empty union
    mean: float


@dataclass
class EvalReport:
    iou: IouReport
    pixel_accuracy: float
    class_names: List[str]
    samples: int
    confusion: Optional[ConfusionMatrix] = field(default=None, repr=False)
