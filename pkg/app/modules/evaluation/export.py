import logging
from pathlib import Path
from typing import Iterable

import numpy as np

from app.modules.attention import AttentionRecord
from app.modules.data import write_pgm
from app.utils.errors import ContractError
from app.utils.helpers import PathLike, atomic_write_text, format_float

logger = logging.getLogger(__name__)


def weights_csv(values: np.ndarray) -> str:
    lines = ["channel,value"] + [f"{c},{format_float(v)}" for c, v in enumerate(values)]
    return "\n".join(lines) + "\n"


def to_gray(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] to 0..255, rounding half up."""
    return np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)


def min_max_gray(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.zeros(values.shape, dtype=np.int64)
    return to_gray((values - lo) / (hi - lo))


def export_attention(
    record: AttentionRecord,
    out_dir: PathLike,
    channels: Iterable[int] = (),
    index: int = 0,
) -> list[Path]:
    """Write the channel weights as CSV and the confidence map as PGM for batch item ``index``."""
    root = Path(out_dir)
    written = [
        atomic_write_text(root / "alpha_low.csv", weights_csv(record.alpha_low[index])),
        atomic_write_text(root / "alpha_high.csv", weights_csv(record.alpha_high[index])),
        write_pgm(root / "beta.pgm", to_gray(record.beta[index])),
    ]
    for c in channels:
        if record.spatial is None:
            raise ContractError("record carries no spatial features to export")
        if not 0 <= c < record.spatial.shape[1]:
            raise ContractError(f"channel {c} outside 0..{record.spatial.shape[1] - 1}")
        written.append(write_pgm(root / f"xsi_channel_{c}.pgm", min_max_gray(record.spatial[index, c])))
    logger.info(f"Exported {len(written)} attention files to {root}")
    return written
