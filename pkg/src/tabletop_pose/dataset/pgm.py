"""Portable graymap (PGM) reading and writing.

The reader accepts binary P5 and ASCII P2, `#` comments anywhere in the
header, and maxval up to 65535 (16-bit samples are big-endian and are rescaled
to 0..255). The writer always emits 8-bit P5 with maxval 255 and no comments.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from tabletop_pose.errors import DimensionError, ParseError

_COMMENT = re.compile(rb"#[^\n\r]*")


def _header_tokens(data: bytes, count: int, source: str) -> tuple[list[bytes], int]:
    """First `count` whitespace-separated header tokens and the offset after them.

    The single whitespace byte that ends the last token is consumed too, so the
    offset points at the first raster byte of a P5 file.
    """
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            match = _COMMENT.match(data, pos)
            assert match is not None
            pos = match.end()
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ParseError(f"{source}: truncated PGM header")
        tokens.append(data[start:pos])
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ParseError(f"{source}: PGM header not followed by whitespace")
    return tokens, pos + 1


def _header_int(token: bytes, field: str, source: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{source}: PGM {field} {token!r} is not an integer") from None
    if value < 1:
        raise ParseError(f"{source}: PGM {field} must be >= 1, got {value}")
    return value


def decode_pgm(data: bytes, source: str = "<bytes>") -> np.ndarray:
    """Decode a P5 or P2 image into a `[1,h,w]` uint8 array.

    Raises:
        ParseError: On an unknown magic, a malformed header, a maxval above
            65535, or a raster of the wrong size.
    """
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise ParseError(f"{source}: not a PGM file (magic {magic!r})")
    (_, w_tok, h_tok, max_tok), offset = _header_tokens(data, 4, source)
    width = _header_int(w_tok, "width", source)
    height = _header_int(h_tok, "height", source)
    maxval = _header_int(max_tok, "maxval", source)
    if maxval > 65535:
        raise ParseError(f"{source}: PGM maxval {maxval} exceeds 65535")

    count = width * height
    if magic == b"P5":
        dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
        expected = count * dtype.itemsize
        raster = data[offset:]
        if len(raster) < expected:
            raise ParseError(f"{source}: PGM raster has {len(raster)} bytes, expected {expected}")
        values = np.frombuffer(raster[:expected], dtype=dtype).astype(np.int64)
    else:
        text = _COMMENT.sub(b" ", data[offset:]).split()
        if len(text) < count:
            raise ParseError(f"{source}: PGM raster has {len(text)} values, expected {count}")
        try:
            values = np.array([int(v) for v in text[:count]], dtype=np.int64)
        except ValueError:
            raise ParseError(f"{source}: non-integer sample in ASCII PGM raster") from None

    if values.max(initial=0) > maxval:
        raise ParseError(f"{source}: sample value exceeds maxval {maxval}")
    if maxval != 255:
        values = np.rint(values * (255.0 / maxval)).astype(np.int64)
    return values.astype(np.uint8).reshape(1, height, width)


def encode_pgm(pixels: np.ndarray) -> bytes:
    """Encode `[h,w]` or `[1,h,w]` integer pixels in 0..255 as 8-bit P5.

    Raises:
        DimensionError: If the array is not a single-channel image.
        ValueError: If values are not integers in 0..255.
    """
    if pixels.ndim == 3 and pixels.shape[0] == 1:
        pixels = pixels[0]
    if pixels.ndim != 2:
        raise DimensionError(f"PGM needs [h,w] or [1,h,w] pixels, got {list(pixels.shape)}")
    if pixels.dtype != np.uint8:
        if not np.all((pixels >= 0) & (pixels <= 255) & (pixels == np.rint(pixels))):
            raise ValueError("PGM pixels must be integers in 0..255")
        pixels = pixels.astype(np.uint8)
    h, w = pixels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(pixels).tobytes()


def quantize(image: np.ndarray) -> np.ndarray:
    """Map a [0,1] image to uint8 0..255 by rounding (error <= 0.5/255)."""
    return np.rint(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def read_pgm(path: str | Path) -> np.ndarray:
    """`[1,h,w]` uint8 pixels of a PGM file."""
    path = Path(path)
    return decode_pgm(path.read_bytes(), source=str(path))


def read_unit_image(path: str | Path) -> np.ndarray:
    """`[1,h,w]` float32 image in [0,1]."""
    return read_pgm(path).astype(np.float32) / np.float32(255.0)


def write_pgm(path: str | Path, pixels: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pgm(pixels))
    return path


def write_unit_image(path: str | Path, image: np.ndarray) -> Path:
    """Quantize a [0,1] image and write it as 8-bit P5."""
    return write_pgm(path, quantize(image))
