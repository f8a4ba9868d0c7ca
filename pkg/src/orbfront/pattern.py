"""BRIEF sampling pattern and its 256 pre-rotated copies."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .kernels import PATCH_RADIUS

N_PAIRS = 256
ANGLE_BINS = 256
TRIG_FRAC_BITS = 13
PATTERN_SEED = 20210606
PATTERN_SIGMA = (2 * PATCH_RADIUS + 1) / 5.0
PATTERN_FILE = "pattern256.txt"


def trig_tables() -> tuple[np.ndarray, np.ndarray]:
    """cos/sin of every angle bin as integers with 13 fractional bits."""
    one = 1 << TRIG_FRAC_BITS
    k = np.arange(ANGLE_BINS)
    ang = 2.0 * math.pi * k / ANGLE_BINS
    cos_t = np.floor(np.cos(ang) * one + 0.5).astype(np.int64)
    sin_t = np.floor(np.sin(ang) * one + 0.5).astype(np.int64)
    return cos_t, sin_t


def rotate_offsets(pairs: np.ndarray, theta_q: int) -> np.ndarray:
    cos_t, sin_t = trig_tables()
    c, s = int(cos_t[theta_q]), int(sin_t[theta_q])
    return _rotate(pairs, np.array([c]), np.array([s]))[0]


def _rotate(pairs, cos_t, sin_t):
    half = 1 << (TRIG_FRAC_BITS - 1)
    x = pairs[None, :, 0::2]
    y = pairs[None, :, 1::2]
    c = cos_t[:, None, None]
    s = sin_t[:, None, None]
    xr = (c * x - s * y + half) >> TRIG_FRAC_BITS
    yr = (s * x + c * y + half) >> TRIG_FRAC_BITS
    out = np.empty((cos_t.shape[0],) + pairs.shape, dtype=np.int64)
    out[:, :, 0::2] = xr
    out[:, :, 1::2] = yr
    return out


@dataclass(frozen=True, eq=False)
class SamplingPattern:
    """``pairs`` is (256, 4) as (ax, ay, bx, by); ``rotated_luts`` is (256 bins, 256, 4)."""

    pairs: np.ndarray
    rotated_luts: np.ndarray

    @classmethod
    def from_pairs(cls, pairs) -> SamplingPattern:
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 4)
        if pairs.shape[0] != N_PAIRS:
            raise ValueError(f"expected {N_PAIRS} pairs, got {pairs.shape[0]}")
        r2 = np.maximum(pairs[:, 0] ** 2 + pairs[:, 1] ** 2, pairs[:, 2] ** 2 + pairs[:, 3] ** 2)
        if (r2 > PATCH_RADIUS**2).any():
            raise ValueError("pattern point outside the patch radius")
        cos_t, sin_t = trig_tables()
        luts = np.ascontiguousarray(_rotate(pairs, cos_t, sin_t))
        pairs.flags.writeable = False
        luts.flags.writeable = False
        return cls(pairs, luts)


def generate_pairs(seed: int = PATTERN_SEED) -> np.ndarray:
    """Draw 256 distinct-point pairs from an isotropic Gaussian inside radius 15."""
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < N_PAIRS:
        ax, ay, bx, by = np.rint(rng.normal(0.0, PATTERN_SIGMA, 4)).astype(int)
        if ax * ax + ay * ay > PATCH_RADIUS**2 or bx * bx + by * by > PATCH_RADIUS**2:
            continue
        if (ax, ay) == (bx, by):
            continue
        pairs.append((ax, ay, bx, by))
    return np.array(pairs, dtype=np.int64)


def format_pairs(pairs: np.ndarray) -> str:
    return "".join(f"{ax} {ay} {bx} {by}\n" for ax, ay, bx, by in np.asarray(pairs).tolist())


def parse_pairs(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 integers, got {len(parts)}")
        rows.append([int(p) for p in parts])
    return np.array(rows, dtype=np.int64).reshape(-1, 4)


def load_pattern(path=None) -> SamplingPattern:
    if path is None:
        return default_pattern()
    with open(path, encoding="ascii") as fh:
        return SamplingPattern.from_pairs(parse_pairs(fh.read()))


def save_pattern(pattern: SamplingPattern, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_pairs(pattern.pairs))


@lru_cache(maxsize=1)
def default_pattern() -> SamplingPattern:
    text = resources.files("orbfront.data").joinpath(PATTERN_FILE).read_text(encoding="ascii")
    return SamplingPattern.from_pairs(parse_pairs(text))
