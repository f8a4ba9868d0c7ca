"""Stereo matching: strip-limited Hamming search, SAD rectification, depth."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .extractor import Extraction, Feature, FeaturePoint
from .imaging import GrayImage
from .kernels import SAD_HALF

DEPTH_RANGE = (0.1, 50.0)
MATCH_CSV_HEADER = ("level", "xl", "yl", "xr", "yr", "hamming", "disparity", "depth")


@dataclass(frozen=True)
class SearchStrip:
    row_tolerance: int = 2
    min_disparity: int = 1
    max_disparity: int = 96

    def __post_init__(self):
        if self.row_tolerance < 0:
            raise ValueError("row_tolerance must be >= 0")
        if not 0 <= self.min_disparity < self.max_disparity:
            raise ValueError("need 0 <= min_disparity < max_disparity")


@dataclass(frozen=True)
class StereoCalib:
    fx: float
    baseline: float

    def __post_init__(self):
        if not (self.fx > 0 and self.baseline > 0):
            raise ValueError("fx and baseline must be positive")


@dataclass(frozen=True)
class MatchCandidate:
    left_idx: int
    right_idx: int
    hamming: int


@dataclass(frozen=True)
class MatchPair:
    """``left``/``right`` are level-frame points (right already SAD-relocated);
    ``disparity`` and ``depth`` are in level-0 units. ``depth`` is None when invalid."""

    left: FeaturePoint
    right: FeaturePoint
    hamming: int
    disparity: float
    depth: float | None
    sad_min: int

    def effective(self, depth_range: tuple[float, float] = DEPTH_RANGE) -> bool:
        return self.depth is not None and self.disparity > 0 and depth_range[0] < self.depth < depth_range[1]


@dataclass(frozen=True)
class MatcherConfig:
    max_hamming: int = 64
    slide: int = 5
    depth_range: tuple[float, float] = DEPTH_RANGE


def hamming_distance(a, b) -> int:
    a = np.frombuffer(getattr(a, "bits", a), dtype=np.uint8)
    b = np.frombuffer(getattr(b, "bits", b), dtype=np.uint8)
    return int(np.bitwise_count(np.bitwise_xor(a, b)).sum())


def _arrays(feats: Sequence[Feature]):
    n = len(feats)
    xs = np.fromiter((fp.x for fp, _ in feats), np.int64, n)
    ys = np.fromiter((fp.y for fp, _ in feats), np.int64, n)
    lv = np.fromiter((fp.level for fp, _ in feats), np.int64, n)
    desc = np.frombuffer(b"".join(d.bits for _, d in feats), dtype=np.uint8).reshape(n, -1) if n else np.zeros((0, 32), np.uint8)
    return xs, ys, lv, desc


def match_arrays(lx, ly, llev, ldesc, rx, ry, rlev, rdesc, strip: SearchStrip, max_hamming: int) -> list[MatchCandidate]:
    """Core of :func:`stereo_match` on parallel arrays; indices refer to these arrays."""
    n_r = rx.shape[0]
    if lx.shape[0] == 0 or n_r == 0:
        return []
    span = strip.max_disparity - strip.min_disparity + 1
    best_j = []
    best_i = []
    best_h = []
    best_d = []
    for level in np.unique(llev):
        li = np.flatnonzero(llev == level)
        rj = np.flatnonzero(rlev == level)
        if rj.size == 0:
            continue
        ham = kernels.hamming_matrix(np.ascontiguousarray(ldesc[li]), np.ascontiguousarray(rdesc[rj])).astype(np.int64)
        disp = lx[li][:, None] - rx[rj][None, :]
        ok = (
            (np.abs(ry[rj][None, :] - ly[li][:, None]) <= strip.row_tolerance)
            & (disp >= strip.min_disparity)
            & (disp <= strip.max_disparity)
        )
        # Lexicographic (hamming, disparity, right index) packed into one key.
        key = (ham * span + (disp - strip.min_disparity)) * n_r + rj[None, :]
        key = np.where(ok, key, np.iinfo(np.int64).max)
        col = key.argmin(axis=1)
        rows = np.arange(li.size)
        hit = ok[rows, col] & (ham[rows, col] <= max_hamming)
        best_i.append(li[hit])
        best_j.append(rj[col[hit]])
        best_h.append(ham[rows, col][hit])
        best_d.append(disp[rows, col][hit])
    if not best_i:
        return []
    bi = np.concatenate(best_i)
    bj = np.concatenate(best_j)
    bh = np.concatenate(best_h)
    bd = np.concatenate(best_d)
    # One-to-one: per right feature keep the claimant with lowest (hamming, disparity, left index).
    order = np.lexsort((bi, bd, bh, bj))
    first = np.ones(order.size, bool)
    first[1:] = bj[order][1:] != bj[order][:-1]
    keep = order[first]
    keep = keep[np.argsort(bi[keep], kind="stable")]
    return [MatchCandidate(int(bi[k]), int(bj[k]), int(bh[k])) for k in keep]


def stereo_match(
    left_feats: Sequence[Feature],
    right_feats: Sequence[Feature],
    strip: SearchStrip | None = None,
    max_hamming: int = 64,
) -> list[MatchCandidate]:
    """Best-Hamming match per left feature inside the strip, same pyramid level only.

    Ties go to the smaller disparity, then the smaller right index. Right
    features claimed twice keep only their lowest-(hamming, disparity, left
    index) claimant; losers are dropped, not re-matched.
    """
    strip = strip or SearchStrip()
    return match_arrays(*_arrays(left_feats), *_arrays(right_feats), strip, max_hamming)


def _window_inside(img: GrayImage, x: int, y: int, half: int) -> bool:
    return half <= x < img.width - half and half <= y < img.height - half


def sad_window(img_l: GrayImage, img_r: GrayImage, c_l, c_r, half: int = SAD_HALF) -> int:
    (xl, yl), (xr, yr) = c_l, c_r
    if not (_window_inside(img_l, xl, yl, half) and _window_inside(img_r, xr, yr, half)):
        raise ValueError("SAD window out of bounds")
    a = img_l.data[yl - half : yl + half + 1, xl - half : xl + half + 1].astype(np.int64)
    b = img_r.data[yr - half : yr + half + 1, xr - half : xr + half + 1].astype(np.int64)
    return int(np.abs(a - b).sum())


@dataclass(frozen=True)
class Rectification:
    disparity: float  # corrected, in the images' own pixel units
    sad_min: int
    offset: int
    delta: float
    sad_initial: int


def parabola_offset(s_minus: float, s_0: float, s_plus: float) -> float:
    den = s_minus - 2 * s_0 + s_plus
    # Zero SAD is an exact match; a shifted vertex would imply negative SAD.
    if den == 0 or s_0 == 0:
        return 0.0
    return min(0.5, max(-0.5, (s_minus - s_plus) / (2.0 * den)))


def sad_rectify(img_l: GrayImage, img_r: GrayImage, c_l, c_r, slide: int = 5, half: int = SAD_HALF) -> Rectification | None:
    """Slide the right window over +-slide px; None when no window fits."""
    (xl, yl), (xr, yr) = c_l, c_r
    prof = kernels.sad_profile(img_l.data, img_r.data, int(xl), int(yl), int(xr), int(yr), half, slide)
    offsets = np.arange(-slide, slide + 1)
    valid = prof >= 0
    if not valid.any():
        return None
    # Minimum SAD, ties to the smallest |offset|, then the negative side.
    cand = [(int(prof[k]), abs(int(offsets[k])), int(offsets[k]), k) for k in np.flatnonzero(valid)]
    s_min, _, d_star, k = min(cand)
    delta = 0.0
    if 0 < k < 2 * slide and valid[k - 1] and valid[k + 1]:
        delta = parabola_offset(float(prof[k - 1]), float(prof[k]), float(prof[k + 1]))
    s_init = int(prof[slide]) if valid[slide] else -1
    return Rectification((xl - xr) - (d_star + delta), s_min, d_star, delta, s_init)


def disparity_to_depth(d: float, calib: StereoCalib | None) -> float | None:
    if calib is None or not d > 0:
        return None
    return calib.fx * calib.baseline / d


def match_stereo_report(
    left: Extraction,
    right: Extraction,
    strip: SearchStrip | None = None,
    calib: StereoCalib | None = None,
    cfg: MatcherConfig | None = None,
) -> tuple[list[MatchPair], Counter]:
    strip = strip or SearchStrip()
    cfg = cfg or MatcherConfig()
    dropped: Counter = Counter()
    pairs: list[MatchPair] = []
    lf = left.features()
    rf = right.features()
    for cand in stereo_match(lf, rf, strip, cfg.max_hamming):
        fl, _ = lf[cand.left_idx]
        fr, _ = rf[cand.right_idx]
        level = fl.level
        rect = sad_rectify(left.smoothed[level], right.smoothed[level], (fl.x, fl.y), (fr.x, fr.y), cfg.slide)
        if rect is None:
            dropped["sad_out_of_bounds"] += 1
            continue
        disparity = rect.disparity * left.scale_factor**level
        pairs.append(
            MatchPair(
                fl,
                replace(fr, x=fr.x + rect.offset),
                cand.hamming,
                disparity,
                disparity_to_depth(disparity, calib),
                rect.sad_min,
            )
        )
    pairs.sort(key=lambda p: (p.left.level, p.left.y, p.left.x))
    return pairs, dropped


def match_stereo(
    left: Extraction,
    right: Extraction,
    strip: SearchStrip | None = None,
    calib: StereoCalib | None = None,
    cfg: MatcherConfig | None = None,
) -> list[MatchPair]:
    return match_stereo_report(left, right, strip, calib, cfg)[0]


def _fmt(v: float | None) -> str:
    if v is None or not math.isfinite(v):
        return "nan"
    return f"{v:.4f}"


def write_match_csv(pairs: Sequence[MatchPair], path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MATCH_CSV_HEADER)
        for p in pairs:
            w.writerow(
                [p.left.level, p.left.x, p.left.y, p.right.x, p.right.y, p.hamming, _fmt(p.disparity), _fmt(p.depth)]
            )


def read_match_csv(path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))
