"""Binary netpbm codecs: P6 (RGB images) and P5 (label maps), maxval 255."""
from pathlib import Path

import numpy as np

from app.utils.errors import ContractError, FormatError
from app.utils.helpers import PathLike, atomic_write_bytes

_WHITESPACE = b" \t\n\r\v\f"
_DIGITS = b"0123456789"
MAXVAL = 255


def _read_header(buf: bytes, magic: bytes) -> tuple[int, int, int]:
    """Return (width, height, payload offset); comments (``#``) are skipped."""
    if not buf.startswith(magic):
        raise FormatError(f"expected magic {magic.decode()}", 0)
    pos = len(magic)
    if pos >= len(buf) or buf[pos] not in _WHITESPACE:
        raise FormatError("magic must be followed by whitespace", pos)

    fields = []
    while len(fields) < 3:
        while pos < len(buf) and (buf[pos] in _WHITESPACE or buf[pos] == ord("#")):
            if buf[pos] == ord("#"):
                end = buf.find(b"\n", pos)
                if end < 0:
                    raise FormatError("unterminated header comment", pos)
                pos = end + 1
            else:
                pos += 1
        start = pos
        while pos < len(buf) and buf[pos] in _DIGITS:
            pos += 1
        if start == pos:
            raise FormatError("expected a decimal header field", start)
        fields.append(int(buf[start:pos]))

    if pos >= len(buf) or buf[pos] not in _WHITESPACE:
        raise FormatError("header must end with a single whitespace byte", pos)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"image dimensions must be positive, got {width}x{height}", pos)
    if maxval != MAXVAL:
        raise FormatError(f"unsupported maxval {maxval}, only {MAXVAL} is handled", pos)
    return width, height, pos + 1


def _payload(buf: bytes, offset: int, expected: int) -> np.ndarray:
    available = len(buf) - offset
    if available < expected:
        raise FormatError(f"payload has {available} bytes, expected {expected}", len(buf))
    if available > expected:
        raise FormatError(f"{available - expected} trailing bytes after payload", offset + expected)
    return np.frombuffer(buf, dtype=np.uint8, count=expected, offset=offset)


def _to_bytes(values: np.ndarray, what: str) -> np.ndarray:
    rounded = np.floor(np.asarray(values, dtype=np.float64) + 0.5)
    if rounded.size and (rounded.min() < 0 or rounded.max() > MAXVAL):
        raise ContractError(f"{what} values must round into 0..{MAXVAL}")
    return rounded.astype(np.uint8)


def encode_ppm(image: np.ndarray) -> bytes:
    """3 x H x W image -> ``P6`` bytes (values rounded half up)."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ContractError(f"encode_ppm expects a 3 x H x W image, got {image.shape}")
    _, h, w = image.shape
    pixels = _to_bytes(image, "image").transpose(1, 2, 0)
    return f"P6\n{w} {h}\n{MAXVAL}\n".encode("ascii") + pixels.tobytes()


def decode_ppm(buf: bytes) -> np.ndarray:
    width, height, offset = _read_header(buf, b"P6")
    pixels = _payload(buf, offset, width * height * 3).reshape(height, width, 3)
    return pixels.transpose(2, 0, 1).astype(np.float64)


def encode_pgm(labels: np.ndarray) -> bytes:
    """H x W integer map -> ``P5`` bytes; 255 is the ignore label."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ContractError(f"encode_pgm expects an H x W map, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > MAXVAL):
        raise ContractError(f"label values must lie in 0..{MAXVAL}")
    h, w = labels.shape
    return f"P5\n{w} {h}\n{MAXVAL}\n".encode("ascii") + _to_bytes(labels, "label").tobytes()


def decode_pgm(buf: bytes) -> np.ndarray:
    width, height, offset = _read_header(buf, b"P5")
    return _payload(buf, offset, width * height).reshape(height, width).astype(np.int64)


def read_ppm(path: PathLike) -> np.ndarray:
    return decode_ppm(Path(path).read_bytes())


def read_pgm(path: PathLike) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


def write_ppm(path: PathLike, image: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_ppm(image))


def write_pgm(path: PathLike, labels: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_pgm(labels))
