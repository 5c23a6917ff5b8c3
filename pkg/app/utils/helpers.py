import os
import tempfile
from pathlib import Path
from typing import Iterable, Union

PathLike = Union[str, os.PathLike]


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    """Write ``payload`` via a temp file in the same directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    """UTF-8, LF line endings."""
    return atomic_write_bytes(path, text.encode("utf-8"))


def parse_float_list(value: Union[str, Iterable[float]]) -> list[float]:
    """Parse ``"0.5,1.0"`` (or pass through an iterable) into floats."""
    if isinstance(value, str):
        return [float(part) for part in value.split(",") if part.strip()]
    return [float(v) for v in value]


def parse_int_list(value: Union[str, Iterable[int]]) -> list[int]:
    if isinstance(value, str):
        return [int(part) for part in value.split(",") if part.strip()]
    return [int(v) for v in value]


def format_float(value: float) -> str:
    """Shortest repr that round-trips; used for CSV and reports."""
    return repr(float(value))
