"""Grayscale rasters, binary PGM I/O, bilinear downscaling and the two-level pyramid."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

PYRAMID_LEVELS = 2
DEFAULT_SCALE_FACTOR = 1.2


class PGMFormatError(ValueError):
    """Malformed PGM header."""


class UnsupportedDepthError(PGMFormatError):
    """PGM maxval other than 255."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit image; ``data`` is a read-only (height, width) uint8 array."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        arr = np.asarray(self.data)
        if arr.size != self.width * self.height:
            raise ValueError(
                f"pixel count {arr.size} does not match {self.width}x{self.height}"
            )
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr.reshape(self.height, self.width))
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> GrayImage:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class ImagePyramid:
    levels: tuple[GrayImage, ...]
    scale_factor: float = DEFAULT_SCALE_FACTOR

    def __post_init__(self):
        if len(self.levels) != PYRAMID_LEVELS:
            raise ValueError(f"pyramid must have exactly {PYRAMID_LEVELS} levels")

    def level_scale(self, level: int) -> float:
        """Factor mapping level coordinates back to level 0."""
        return self.scale_factor**level


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PGMFormatError("unexpected end of header")
    return buf[start:pos], pos


def decode_pgm(buf: bytes) -> GrayImage:
    magic, pos = _next_token(buf, 0)
    if magic != b"P5":
        raise PGMFormatError(f"not a binary PGM (magic {magic!r})")
    fields = []
    for _ in range(3):
        tok, pos = _next_token(buf, pos)
        if not tok.isdigit():
            raise PGMFormatError(f"bad header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedDepthError(f"maxval {maxval} unsupported, only 255")
    if width < 1 or height < 1:
        raise PGMFormatError(f"bad dimensions {width}x{height}")
    if pos >= len(buf) or not buf[pos : pos + 1].isspace():
        raise PGMFormatError("missing whitespace after maxval")
    pos += 1
    payload = buf[pos : pos + width * height]
    if len(payload) != width * height:
        raise OSError(f"truncated PGM payload: {len(payload)} of {width * height} bytes")
    return GrayImage(width, height, np.frombuffer(payload, dtype=np.uint8))


def encode_pgm(img: GrayImage) -> bytes:
    return b"P5\n%d %d\n255\n" % (img.width, img.height) + img.data.tobytes()


def load_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def save_pgm(img: GrayImage, path) -> None:
    if img.width < 1 or img.height < 1 or img.data.size != img.width * img.height:
        raise ValueError("invalid image")
    payload = encode_pgm(img)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _axis_weights(n_src: int, n_dst: int):
    scale = n_src / n_dst
    pos = (np.arange(n_dst) + 0.5) * scale - 0.5
    pos = np.clip(pos, 0.0, n_src - 1)
    i0 = np.floor(pos).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_src - 1)
    return i0, i1, pos - i0


def resize_bilinear(src: GrayImage, dst_w: int, dst_h: int) -> GrayImage:
    """Downscale with pixel-center sampling, edge clamping and round-half-up."""
    if dst_w < 1 or dst_h < 1:
        raise ValueError("target dimensions must be >= 1")
    if dst_w > src.width or dst_h > src.height:
        raise ValueError(
            f"upscaling not supported: {src.width}x{src.height} -> {dst_w}x{dst_h}"
        )
    x0, x1, fx = _axis_weights(src.width, dst_w)
    y0, y1, fy = _axis_weights(src.height, dst_h)
    img = src.data.astype(np.float64)
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    # Absorb float noise so exact .5 values round up and integers stay integers.
    out = np.floor(out + 0.5 + 1e-9)
    return GrayImage(dst_w, dst_h, np.clip(out, 0, 255).astype(np.uint8))


def pyramid_level_size(width: int, height: int, scale_factor: float) -> tuple[int, int]:
    """Level-1 size: ceil on width, round-half-up on height (1280x720 -> 1067x600 at 1.2).

    Clamped to one pixel below the source so the level always shrinks.
    """
    eps = 1e-9
    w = min(math.ceil(width / scale_factor - eps), width - 1)
    h = min(math.floor(height / scale_factor + 0.5 + eps), height - 1)
    return max(w, 1), max(h, 1)


def build_pyramid(src: GrayImage, scale_factor: float = DEFAULT_SCALE_FACTOR) -> ImagePyramid:
    if not scale_factor > 1.0:
        raise ValueError(f"scale_factor must be > 1, got {scale_factor}")
    w, h = pyramid_level_size(src.width, src.height, scale_factor)
    return ImagePyramid((src, resize_bilinear(src, w, h)), scale_factor)
