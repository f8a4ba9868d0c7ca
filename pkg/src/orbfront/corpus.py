"""Synthetic rectified stereo scenes with known integer disparity."""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .imaging import GrayImage, save_pgm

DEFAULT_FX = 500.0
DEFAULT_BASELINE = 0.1


def render_texture(width: int, height: int, rng: np.random.Generator, n_shapes: int | None = None) -> np.ndarray:
    """Piecewise-constant rectangles and discs over smooth noise, as uint8."""
    if n_shapes is None:
        n_shapes = max(8, width * height // 1500)
    canvas = np.full((height, width), rng.uniform(60, 190))
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(n_shapes):
        level = rng.uniform(0, 255)
        cx, cy = rng.uniform(0, width), rng.uniform(0, height)
        if rng.random() < 0.5:
            hw, hh = rng.uniform(3, 30), rng.uniform(3, 30)
            x0, x1 = int(max(cx - hw, 0)), int(min(cx + hw, width))
            y0, y1 = int(max(cy - hh, 0)), int(min(cy + hh, height))
            canvas[y0:y1, x0:x1] = level
        else:
            r = rng.uniform(3, 20)
            canvas[(xx - cx) ** 2 + (yy - cy) ** 2 <= r * r] = level
    # Low-frequency noise keeps repeated shapes from looking identical.
    coarse = rng.normal(0, 18, (height // 8 + 2, width // 8 + 2))
    noise = np.kron(coarse, np.ones((8, 8)))[:height, :width]
    k = np.array([1, 4, 6, 4, 1], float) / 16
    for axis in (0, 1):
        noise = np.apply_along_axis(lambda v: np.convolve(v, k, mode="same"), axis, noise)
    canvas += noise + rng.normal(0, 2.0, canvas.shape)
    return np.clip(np.floor(canvas + 0.5), 0, 255).astype(np.uint8)


def stereo_pair(width: int, height: int, shift: int, seed: int) -> tuple[GrayImage, GrayImage]:
    """Right view is the left view translated so that x_right = x_left - shift."""
    if shift < 0:
        raise ValueError("shift must be >= 0")
    rng = np.random.default_rng(seed)
    base = render_texture(width + shift, height, rng)
    left = base[:, :width]
    right = base[:, shift : shift + width]
    return GrayImage.from_array(left), GrayImage.from_array(right)


def frame_name(i: int) -> str:
    return f"frame_{i:04d}.pgm"


def write_calib(path, fx: float = DEFAULT_FX, baseline: float = DEFAULT_BASELINE) -> None:
    Path(path).write_text(f"fx = {fx}\nbaseline = {baseline}\n", encoding="ascii")


def generate_corpus(
    out_dir,
    frames: int = 30,
    width: int = 640,
    height: int = 480,
    shift: int = 12,
    seed: int = 0,
    identical: bool = False,
) -> Path:
    """Write ``left/``, ``right/``, ``calib.txt`` and ``truth.csv`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "left").mkdir(parents=True, exist_ok=True)
    (out / "right").mkdir(parents=True, exist_ok=True)
    rows = ["frame,shift"]
    for i in range(frames):
        left, right = stereo_pair(width, height, 0 if identical else shift, seed * 100003 + i)
        save_pgm(left, out / "left" / frame_name(i))
        save_pgm(right, out / "right" / frame_name(i))
        rows.append(f"{frame_name(i)},{0 if identical else shift}")
    write_calib(out / "calib.txt")
    (out / "truth.csv").write_text("\n".join(rows) + "\n", encoding="ascii")
    return out


def list_frames(dataset_dir) -> list[str]:
    names = set()
    for side in ("left", "right"):
        d = os.path.join(dataset_dir, side)
        if os.path.isdir(d):
            names.update(n for n in os.listdir(d) if n.lower().endswith(".pgm"))
    return sorted(names)
