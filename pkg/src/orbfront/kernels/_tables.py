"""Constant geometry shared by both kernel backends."""
import math

import numpy as np

# Bresenham circle of radius 3, clockwise from 12 o'clock (image y grows downward).
CIRCLE_DX = np.array([0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1], dtype=np.int64)
CIRCLE_DY = np.array([-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3], dtype=np.int64)
FAST_ARC = 9

PATCH_RADIUS = 15
BORDER = 16
SAD_HALF = 5  # 11x11 windows

# Row half-widths of the circular moment mask: floor(sqrt(r^2 - dy^2)).
MASK_HALF_WIDTH = np.array(
    [math.isqrt(PATCH_RADIUS**2 - dy * dy) for dy in range(-PATCH_RADIUS, PATCH_RADIUS + 1)],
    dtype=np.int64,
)


def mask_offsets() -> tuple[np.ndarray, np.ndarray]:
    """Flattened (dx, dy) offsets of every pixel in the circular moment mask."""
    dxs, dys = [], []
    for i, dy in enumerate(range(-PATCH_RADIUS, PATCH_RADIUS + 1)):
        hw = int(MASK_HALF_WIDTH[i])
        for dx in range(-hw, hw + 1):
            dxs.append(dx)
            dys.append(dy)
    return np.array(dxs, dtype=np.int64), np.array(dys, dtype=np.int64)


MASK_DX, MASK_DY = mask_offsets()
