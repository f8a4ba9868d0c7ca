"""FAST detection against an exhaustive segment-test oracle."""
import numpy as np
import pytest

from orbfront.extractor import fast_detect
from orbfront.imaging import GrayImage

# Written out independently of the package tables.
RING = [(0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
        (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3)]
BORDER = 16


def segment_test(img, x, y, t):
    """Score of the qualifying arc, or 0. Tries all 16 rotations of a 9-window."""
    c = int(img[y, x])
    d = [int(img[y + dy, x + dx]) - c for dx, dy in RING]
    for sign in (1, -1):
        passing = [sign * v > t for v in d]
        covered = set()
        for s in range(16):
            if all(passing[(s + k) % 16] for k in range(9)):
                covered.update((s + k) % 16 for k in range(9))
        if covered:
            return sum(abs(d[k]) for k in covered)
    return 0


def oracle_scores(img, t):
    h, w = img.shape
    sc = np.zeros((h, w), int)
    for y in range(BORDER, h - BORDER):
        for x in range(BORDER, w - BORDER):
            sc[y, x] = segment_test(img, x, y, t)
    return sc


def oracle_detect(img, t):
    sc = oracle_scores(img, t)
    h, w = sc.shape
    out = []
    for y in range(h):
        for x in range(w):
            s = sc[y, x]
            if s <= 0:
                continue
            keep = True
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    yy, xx = y + dy, x + dx
                    if (dx, dy) == (0, 0) or not (0 <= yy < h and 0 <= xx < w):
                        continue
                    earlier = (dy, dx) < (0, 0)
                    if sc[yy, xx] > s or (sc[yy, xx] == s and earlier):
                        keep = False
            if keep:
                out.append((x, y, int(s)))
    return out


def square_image():
    a = np.zeros((41, 41), np.uint8)
    a[20:40, 20:40] = 255
    return a


def test_constant_image_has_no_corners(backend):
    img = GrayImage(64, 64, np.full(64 * 64, 77, np.uint8))
    assert fast_detect(img, 1) == []


def test_too_small_image_gives_empty(backend):
    img = GrayImage(32, 40, np.zeros(32 * 40, np.uint8))
    assert fast_detect(img, 20) == []


def test_square_corner(backend):
    a = square_image()
    got = fast_detect(GrayImage.from_array(a), 20)
    assert got == oracle_detect(a, 20)
    assert any((x, y) in {(20, 20), (21, 21)} for x, y, _ in got)


@pytest.mark.parametrize("seed", range(4))
def test_random_scene_matches_oracle(backend, seed):
    r = np.random.default_rng(seed)
    a = r.integers(0, 256, (13, 15)).repeat(4, 0).repeat(4, 1)[:50, :56].astype(np.uint8)
    a = np.clip(a.astype(int) + r.integers(-6, 7, a.shape), 0, 255).astype(np.uint8)
    got = fast_detect(GrayImage.from_array(a), 15)
    assert got == oracle_detect(a, 15)
    assert got, "scene should contain corners"


def test_every_detection_passes_segment_test(backend, rng):
    a = rng.integers(0, 256, (60, 70), dtype=np.uint8)
    for x, y, s in fast_detect(GrayImage.from_array(a), 30):
        assert BORDER <= x < 70 - BORDER and BORDER <= y < 60 - BORDER
        assert segment_test(a, x, y, 30) == s > 0
