"""
Checkpoint file layout (all integers little-endian)::

    "DFDM" | version u32 | tensor count u32
    per tensor: name length u16 | UTF-8 name | rank u8 | dims u32 x rank | f64 payload
    trailer: iteration u64 | seed u64

Model parameters and normalization buffers are stored under their own names,
the preprocessing mean under ``meta.mean_rgb`` and optimizer velocities under
``optim.velocity.<parameter>``.
"""
import logging
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from app.modules.network import DfDamModel, model_from_tensors
from app.utils.errors import ContractError, FormatError
from app.utils.helpers import PathLike, atomic_write_bytes
from .schemas import Checkpoint, OptimizerState

logger = logging.getLogger(__name__)

MAGIC = b"DFDM"
VERSION = 1
MEAN_KEY = "meta.mean_rgb"
VELOCITY_PREFIX = "optim.velocity."

_HEADER = struct.Struct("<4sII")
_TRAILER = struct.Struct("<QQ")


def encode_tensors(tensors: Mapping[str, np.ndarray], iteration: int = 0, seed: int = 0) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, len(tensors))]
    for name, value in tensors.items():
        raw = name.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ContractError(f"tensor name {name[:32]!r}... is too long to store")
        arr = np.asarray(value, dtype="<f8", order="C")
        if arr.ndim > 0xFF:
            raise ContractError(f"tensor {name!r} has rank {arr.ndim}, at most 255 is storable")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(struct.pack(f"<B{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes())
    parts.append(_TRAILER.pack(iteration, seed))
    return b"".join(parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"truncated checkpoint while reading {what}", self.pos)
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_tensors(buf: bytes) -> tuple[dict[str, np.ndarray], int, int]:
    """Return (tensors in file order, iteration, seed)."""
    reader = _Reader(buf)
    magic = reader.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    (version,) = reader.unpack("<I", "version")
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}", 4)
    (count,) = reader.unpack("<I", "tensor count")

    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        start = reader.pos
        (name_len,) = reader.unpack("<H", "name length")
        try:
            name = reader.take(name_len, "name").decode("utf-8")
        except UnicodeDecodeError:
            raise FormatError("tensor name is not valid UTF-8", start + 2) from None
        if name in tensors:
            raise FormatError(f"duplicate tensor {name!r}", start)
        (rank,) = reader.unpack("<B", "rank")
        dims = reader.unpack(f"<{rank}I", f"dims of {name!r}")
        count_values = int(np.prod(dims, dtype=np.int64))
        payload = reader.take(8 * count_values, f"payload of {name!r}")
        tensors[name] = np.frombuffer(payload, dtype="<f8").reshape(dims).astype(np.float64)

    iteration, seed = reader.unpack("<QQ", "trailer")
    if reader.pos != len(buf):
        raise FormatError(f"{len(buf) - reader.pos} unexpected bytes after trailer", reader.pos)
    return tensors, iteration, seed


def checkpoint_tensors(
    model: DfDamModel, state: OptimizerState, mean_rgb
) -> dict[str, np.ndarray]:
    tensors: dict[str, np.ndarray] = {name: p.data for name, p in model.params.items()}
    tensors.update(model.buffers)
    tensors[MEAN_KEY] = np.asarray(mean_rgb, dtype=np.float64)
    for name, v in state.velocity.items():
        tensors[VELOCITY_PREFIX + name] = v
    return tensors


def save_checkpoint(
    model: DfDamModel,
    state: OptimizerState,
    path: PathLike,
    mean_rgb=(0.0, 0.0, 0.0),
    seed: int = 0,
) -> Path:
    payload = encode_tensors(checkpoint_tensors(model, state, mean_rgb), state.iteration, seed)
    target = atomic_write_bytes(path, payload)
    logger.info(f"Saved checkpoint at iteration {state.iteration} to {target}")
    return target


def load_checkpoint(path: PathLike) -> Checkpoint:
    """Decode fully before building anything, so a bad file yields no model."""
    tensors, iteration, seed = decode_tensors(Path(path).read_bytes())
    mean = tensors.pop(MEAN_KEY, np.zeros(3))
    if mean.shape != (3,):
        raise FormatError(f"{MEAN_KEY} has shape {mean.shape}, expected (3,)")
    velocity = {
        name[len(VELOCITY_PREFIX):]: tensors.pop(name)
        for name in list(tensors)
        if name.startswith(VELOCITY_PREFIX)
    }
    model = model_from_tensors(tensors)
    logger.debug(f"Loaded {len(model.params)} parameters from {path} (iteration {iteration})")
    return Checkpoint(
        model=model,
        state=OptimizerState(velocity=velocity, iteration=iteration),
        mean_rgb=tuple(float(v) for v in mean),
        seed=seed,
    )
