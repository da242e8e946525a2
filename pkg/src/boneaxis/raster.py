"""Raster I/O: 8-bit single-channel PGM (binary, P5) and grayscale PNG.

Masks treat any nonzero sample as foreground and are written as 0/255.
Likelihood maps are stored as round(255 * value); this is lossy by design,
so imports renormalize to peak 1 (the annotation file stays the canonical
exchange format for analytic ROIs). Spacing never comes from image
metadata; it is supplied by the caller.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InvalidInputError
from .mask import BinaryMask
from .roi import LikelihoodMap, normalize_peak


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise InvalidInputError(f"{path}: not a binary PGM (P5) file")
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed through the end of the line
    tokens = []
    pos = 2
    while len(tokens) < 3:
        if pos >= len(data):
            raise InvalidInputError(f"{path}: truncated PGM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise InvalidInputError(f"{path}: truncated PGM comment")
            pos += 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1:
        raise InvalidInputError(f"{path}: invalid PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise InvalidInputError(f"{path}: only 8-bit PGM supported, maxval={maxval}")
    expected = width * height
    raw = data[pos:pos + expected]
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: PGM payload has {len(raw)} bytes, expected {expected}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width)


def _write_pgm(arr: np.ndarray, path: Path):
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + arr.astype(np.uint8).tobytes())


def _read_gray(path: Path) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return _read_pgm(path)
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("L"))
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"{path}: cannot read image ({exc})") from exc


def _write_gray(arr: np.ndarray, path: Path):
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        _write_pgm(arr, path)
    else:
        Image.fromarray(arr.astype(np.uint8), mode="L").save(path, format="PNG")


def read_mask(path, spacing: float = 1.0) -> BinaryMask:
    """Load a mask from PNG or PGM; any nonzero sample is foreground."""
    return BinaryMask(_read_gray(Path(path)) != 0, spacing)


def write_mask(mask: BinaryMask, path):
    _write_gray(np.where(mask.pixels, 255, 0), Path(path))


def read_likelihood(path) -> LikelihoodMap:
    """Load an 8-bit likelihood map and renormalize it to peak 1."""
    arr = _read_gray(Path(path)).astype(np.float64) / 255.0
    return normalize_peak(LikelihoodMap(arr))


def write_likelihood(roi: LikelihoodMap, path):
    _write_gray(np.rint(roi.values * 255.0), Path(path))
