"""Raw image carrier and binary PPM (P6, 8-bit) decoding.

JPEG decoding is out of scope; upstream tooling converts search-engine
images to PPM before they enter the pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadImageFile

# ITU-R BT.601 luma weights
_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class Image:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8, row-major RGB

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise BadImageFile(
                f"pixel grid {self.pixels.shape} inconsistent with "
                f"{self.width}x{self.height}")
        if self.pixels.dtype != np.uint8:
            raise BadImageFile(f"expected uint8 pixels, got {self.pixels.dtype}")


def grayscale(img: Image) -> np.ndarray:
    """Luma plane as uint8, rounded half-up."""
    gray = img.pixels.astype(np.float64) @ _GRAY_WEIGHTS
    return np.floor(gray + 0.5).astype(np.uint8)


def _read_header_tokens(data: bytes, count: int):
    """Pull whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset just past the single whitespace
    byte that terminates the last one.
    """
    tokens = []
    i = 0
    while len(tokens) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i < len(data) and data[i:i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        if start == i:
            raise BadImageFile("truncated PPM header")
        tokens.append(data[start:i])
        if len(tokens) == count:
            i += 1  # exactly one whitespace byte before the raster
    return tokens, i


def decode_ppm(data: bytes) -> Image:
    if not data.startswith(b"P6"):
        raise BadImageFile("not a binary PPM (P6) file")
    tokens, offset = _read_header_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise BadImageFile(f"non-numeric PPM header fields: {tokens}") from None
    if width < 1 or height < 1:
        raise BadImageFile(f"bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise BadImageFile(f"only 8-bit PPM supported (maxval 255), got {maxval}")
    raster = data[2 + offset:]
    expected = width * height * 3
    if len(raster) < expected:
        raise BadImageFile(f"PPM raster truncated: {len(raster)} < {expected} bytes")
    pixels = np.frombuffer(raster[:expected], dtype=np.uint8).reshape(height, width, 3)
    return Image(width=width, height=height, pixels=pixels.copy())


def read_ppm(path) -> Image:
    with open(path, "rb") as fh:
        return decode_ppm(fh.read())


def encode_ppm(img: Image) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def write_ppm(img: Image, path):
    with open(path, "wb") as fh:
        fh.write(encode_ppm(img))
