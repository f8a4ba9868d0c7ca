"""Keypoint orientation from intensity-centroid moments.

Two arithmetic paths produce an angle quantized to 256 bins (one bin is
2*pi/256 rad):

* ``FLOAT``: double-precision atan2, rounded to the nearest bin.
* ``FIXED8``: octant folding, an 8-bit (Q0.8) ratio of the smaller to the
  larger moment magnitude, and a 256-entry arctangent table. No floating
  point is involved at run time; the table would be a ROM in hardware.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

BINS = 256
RATIO_BITS = 8
_RATIO_ONE = 1 << RATIO_BITS
TWO_PI = 2.0 * math.pi


class ArithMode(str, enum.Enum):
    FLOAT = "float"
    FIXED8 = "fixed8"


# atan(q / 256) in bins for q in [0, 255]; values fit in 6 bits (max 32).
ATAN_LUT = np.array(
    [math.floor(math.atan(q / _RATIO_ONE) * BINS / TWO_PI + 0.5) for q in range(_RATIO_ONE)],
    dtype=np.int64,
)


class Orientation(NamedTuple):
    theta_q: int
    theta_f: float | None
    degenerate: bool


def _float_batch(m10, m01):
    theta = np.mod(np.arctan2(m01.astype(np.float64), m10.astype(np.float64)), TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    q = np.floor(theta * (BINS / TWO_PI) + 0.5).astype(np.int64) % BINS
    return q, theta


def _fixed8_batch(m10, m01):
    ax = np.abs(m10)
    ay = np.abs(m01)
    num = np.minimum(ax, ay)
    den = np.maximum(ax, ay)
    safe = np.where(den == 0, 1, den)
    ratio = np.minimum((num * _RATIO_ONE + safe // 2) // safe, _RATIO_ONE - 1)
    octant = ATAN_LUT[ratio]
    phi = np.where(ay <= ax, octant, BINS // 4 - octant)  # first-quadrant angle, 0..64
    neg_x = m10 < 0
    neg_y = m01 < 0
    theta = np.where(
        neg_x,
        np.where(neg_y, BINS // 2 + phi, BINS // 2 - phi),
        np.where(neg_y, BINS - phi, phi),
    )
    return theta % BINS


def orientation_batch(m10, m01, mode: ArithMode = ArithMode.FLOAT):
    """Vectorized orientation. Returns (theta_q, theta_f or None, degenerate mask)."""
    m10 = np.asarray(m10, dtype=np.int64)
    m01 = np.asarray(m01, dtype=np.int64)
    degenerate = (m10 == 0) & (m01 == 0)
    if ArithMode(mode) is ArithMode.FLOAT:
        q, theta = _float_batch(m10, m01)
        theta = np.where(degenerate, 0.0, theta)
    else:
        q, theta = _fixed8_batch(m10, m01), None
    q = np.where(degenerate, 0, q)
    return q, theta, degenerate


def orientation(m10: int, m01: int, mode: ArithMode = ArithMode.FLOAT) -> Orientation:
    q, theta, degenerate = orientation_batch([m10], [m01], mode)
    return Orientation(int(q[0]), None if theta is None else float(theta[0]), bool(degenerate[0]))
