"""Oriented FAST detection and rotated BRIEF description over a two-level pyramid."""
from __future__ import annotations

import math
import struct
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .imaging import DEFAULT_SCALE_FACTOR, GrayImage, ImagePyramid, build_pyramid
from .kernels import BORDER, PATCH_RADIUS
from .orientation import ArithMode, orientation_batch
from .pattern import SamplingPattern, default_pattern

DESCRIPTOR_BYTES = 32
GAUSS_SIZE = 7
GAUSS_SIGMA = 2.0
GAUSS_SUM = 1024


@dataclass(frozen=True)
class ExtractorConfig:
    fast_threshold: int = 20
    max_features_per_level: int = 600
    arith_mode: ArithMode = ArithMode.FLOAT
    patch_radius: int = PATCH_RADIUS
    scale_factor: float = DEFAULT_SCALE_FACTOR

    def __post_init__(self):
        if self.fast_threshold < 1:
            raise ValueError("fast_threshold must be >= 1")
        if self.max_features_per_level < 1:
            raise ValueError("max_features_per_level must be >= 1")
        if self.patch_radius != PATCH_RADIUS:
            raise ValueError(f"patch_radius is fixed at {PATCH_RADIUS}")
        object.__setattr__(self, "arith_mode", ArithMode(self.arith_mode))


@dataclass(frozen=True)
class FeaturePoint:
    x: int
    y: int
    level: int
    score: int
    theta_q: int
    theta_f: float | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class PatchMoments:
    m00: int
    m10: int
    m01: int


@dataclass(frozen=True)
class Descriptor:
    """256 test bits; test i lives in byte i // 8, bit i % 8 (LSB first)."""

    bits: bytes

    def __post_init__(self):
        if len(self.bits) != DESCRIPTOR_BYTES:
            raise ValueError(f"descriptor must be {DESCRIPTOR_BYTES} bytes")

    def bit(self, i: int) -> int:
        return (self.bits[i >> 3] >> (i & 7)) & 1

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.bits, dtype=np.uint8)


Feature = tuple[FeaturePoint, Descriptor]


def fast_detect(img: GrayImage, threshold: int) -> list[tuple[int, int, int]]:
    """9-of-16 segment-test corners with 3x3 non-maximum suppression, as (x, y, score)."""
    if img.width < 2 * BORDER + 1 or img.height < 2 * BORDER + 1:
        return []
    score = kernels.fast_score_map(img.data, int(threshold), BORDER)
    keep = kernels.nms_3x3(score)
    ys, xs = np.nonzero(keep)
    return [(int(x), int(y), int(score[y, x])) for y, x in zip(ys, xs)]


def _check_border(img: GrayImage, x, y):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.size and (
        x.min() < BORDER or y.min() < BORDER or x.max() > img.width - 1 - BORDER or y.max() > img.height - 1 - BORDER
    ):
        raise ValueError(f"point closer than {BORDER} px to the image edge")


def patch_moments(img: GrayImage, cx: int, cy: int) -> PatchMoments:
    _check_border(img, [cx], [cy])
    m = kernels.patch_moments(img.data, np.array([cx], np.int64), np.array([cy], np.int64))[0]
    return PatchMoments(int(m[0]), int(m[1]), int(m[2]))


def gaussian_kernel() -> np.ndarray:
    """7x7 sigma=2 kernel in integers summing to exactly 1024.

    Entries are rounded independently; the center tap absorbs the rounding
    residual so the kernel stays symmetric and preserves constants.
    """
    r = GAUSS_SIZE // 2
    ax = np.arange(-r, r + 1)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2 * GAUSS_SIGMA**2))
    k = np.floor(g / g.sum() * GAUSS_SUM + 0.5).astype(np.int64)
    k[r, r] += GAUSS_SUM - k.sum()
    return k


GAUSS_KERNEL = gaussian_kernel()


def gaussian_smooth(img: GrayImage) -> GrayImage:
    return GrayImage(img.width, img.height, kernels.gaussian7(img.data, GAUSS_KERNEL))


def stream_smoothed_rows(img: GrayImage) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(row, smoothed_row)`` holding only seven input rows in flight.

    Mirrors a line-buffer implementation; output equals :func:`gaussian_smooth`.
    """
    r = GAUSS_SIZE // 2
    h = img.height
    buf: deque[np.ndarray] = deque(maxlen=GAUSS_SIZE)

    def padded(row_idx):
        return np.pad(img.data[min(max(row_idx, 0), h - 1)].astype(np.int64), r, mode="edge")

    for i in range(-r, r):
        buf.append(padded(i))
    w = img.width
    for y in range(h):
        buf.append(padded(y + r))
        acc = np.zeros(w, np.int64)
        for ky, row in enumerate(buf):
            for kx in range(GAUSS_SIZE):
                acc += GAUSS_KERNEL[ky, kx] * row[kx : kx + w]
        yield y, ((acc + GAUSS_SUM // 2) >> 10).astype(np.uint8)


def compute_descriptor(smoothed: GrayImage, fp: FeaturePoint, pattern: SamplingPattern | None = None) -> Descriptor:
    pattern = pattern or default_pattern()
    _check_border(smoothed, [fp.x], [fp.y])
    d = kernels.descriptors(
        smoothed.data,
        np.array([fp.x], np.int64),
        np.array([fp.y], np.int64),
        np.array([fp.theta_q], np.int64),
        pattern.rotated_luts,
    )
    return Descriptor(d[0].tobytes())


@dataclass
class LevelFeatures:
    """Array view of one level's keypoints, ordered by (y, x)."""

    level: int
    xs: np.ndarray
    ys: np.ndarray
    scores: np.ndarray
    theta_q: np.ndarray
    theta_f: np.ndarray | None
    degenerate: np.ndarray
    descriptors: np.ndarray

    def __len__(self):
        return self.xs.shape[0]

    def to_features(self) -> list[Feature]:
        out = []
        for i in range(len(self)):
            fp = FeaturePoint(
                int(self.xs[i]),
                int(self.ys[i]),
                self.level,
                int(self.scores[i]),
                int(self.theta_q[i]),
                None if self.theta_f is None else float(self.theta_f[i]),
                bool(self.degenerate[i]),
            )
            out.append((fp, Descriptor(self.descriptors[i].tobytes())))
        return out


def extract_level(img: GrayImage, smoothed: GrayImage, level: int, cfg: ExtractorConfig, pattern: SamplingPattern) -> LevelFeatures:
    if img.width < 2 * BORDER + 1 or img.height < 2 * BORDER + 1:
        score = np.zeros(img.shape, np.int32)
        keep = np.zeros(img.shape, bool)
    else:
        score = kernels.fast_score_map(img.data, int(cfg.fast_threshold), BORDER)
        keep = kernels.nms_3x3(score)
    ys, xs = np.nonzero(keep)
    s = score[ys, xs]
    if len(xs) > cfg.max_features_per_level:
        # Raster order from nonzero breaks score ties by (y, x).
        top = np.argsort(-s, kind="stable")[: cfg.max_features_per_level]
        top.sort()
        ys, xs, s = ys[top], xs[top], s[top]
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    m = kernels.patch_moments(img.data, xs, ys)
    theta_q, theta_f, degenerate = orientation_batch(m[:, 1], m[:, 2], cfg.arith_mode)
    desc = kernels.descriptors(smoothed.data, xs, ys, theta_q.astype(np.int64), pattern.rotated_luts)
    return LevelFeatures(level, xs, ys, s.astype(np.int64), theta_q, theta_f, degenerate, desc)


@dataclass
class Extraction:
    """Everything one image contributes to matching."""

    levels: list[LevelFeatures]
    smoothed: tuple[GrayImage, ...]
    scale_factor: float
    config: ExtractorConfig = field(default_factory=ExtractorConfig)

    def features(self) -> list[Feature]:
        out: list[Feature] = []
        for lv in self.levels:
            out.extend(lv.to_features())
        return out

    def __len__(self):
        return sum(len(lv) for lv in self.levels)


def extract_pyramid(pyr: ImagePyramid, cfg: ExtractorConfig, pattern: SamplingPattern | None = None) -> Extraction:
    pattern = pattern or default_pattern()
    smoothed = tuple(gaussian_smooth(level) for level in pyr.levels)
    levels = [extract_level(img, sm, k, cfg, pattern) for k, (img, sm) in enumerate(zip(pyr.levels, smoothed))]
    return Extraction(levels, smoothed, pyr.scale_factor, cfg)


def extract(pyr: ImagePyramid, cfg: ExtractorConfig | None = None, pattern: SamplingPattern | None = None) -> list[Feature]:
    """Features of every level, ordered by (level, y, x)."""
    return extract_pyramid(pyr, cfg or ExtractorConfig(), pattern).features()


def extract_image(img: GrayImage, cfg: ExtractorConfig | None = None, pattern: SamplingPattern | None = None) -> Extraction:
    cfg = cfg or ExtractorConfig()
    return extract_pyramid(build_pyramid(img, cfg.scale_factor), cfg, pattern)


def level0_coords(x: int, y: int, level: int, scale_factor: float) -> tuple[int, int]:
    s = scale_factor**level
    return math.floor(x * s + 0.5), math.floor(y * s + 0.5)


# Dump record: x, y (level-0 pixels << 3, sub-pixel bits left 0), level, theta_q, then 32 descriptor bytes.
DUMP_HEADER = struct.Struct("<iiii")
DUMP_RECORD_SIZE = DUMP_HEADER.size + DESCRIPTOR_BYTES
SUBPIXEL_BITS = 3


def encode_descriptor_dump(features: list[Feature], scale_factor: float) -> bytes:
    out = bytearray()
    for fp, desc in features:
        x0, y0 = level0_coords(fp.x, fp.y, fp.level, scale_factor)
        out += DUMP_HEADER.pack(x0 << SUBPIXEL_BITS, y0 << SUBPIXEL_BITS, fp.level, fp.theta_q)
        out += desc.bits
    return bytes(out)


def decode_descriptor_dump(buf: bytes) -> list[tuple[int, int, int, int, bytes]]:
    """Records as (x_sub, y_sub, level, theta_q, descriptor bytes)."""
    if len(buf) % DUMP_RECORD_SIZE:
        raise ValueError(f"dump size {len(buf)} is not a multiple of {DUMP_RECORD_SIZE}")
    out = []
    for off in range(0, len(buf), DUMP_RECORD_SIZE):
        x, y, level, tq = DUMP_HEADER.unpack_from(buf, off)
        out.append((x, y, level, tq, bytes(buf[off + DUMP_HEADER.size : off + DUMP_RECORD_SIZE])))
    return out


def write_descriptor_dump(extraction: Extraction, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_descriptor_dump(extraction.features(), extraction.scale_factor))
