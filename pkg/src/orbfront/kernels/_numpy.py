"""Vectorized numpy kernels; same signatures and results as the numba backend."""
import numpy as np

from ._tables import CIRCLE_DX, CIRCLE_DY, FAST_ARC, MASK_DX, MASK_DY

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int32)


def _arc_scores(diffs, threshold, sign):
    # diffs: (16, N). Triple the ring so runs crossing index 0 are seen whole.
    m = sign * diffs > threshold
    ring = np.concatenate([m, m, m], axis=0)
    n = ring.shape[0]
    fwd = np.zeros(ring.shape, np.int32)
    bwd = np.zeros(ring.shape, np.int32)
    fwd[n - 1] = ring[n - 1]
    for k in range(n - 2, -1, -1):
        fwd[k] = (fwd[k + 1] + 1) * ring[k]
    bwd[0] = ring[0]
    for k in range(1, n):
        bwd[k] = (bwd[k - 1] + 1) * ring[k]
    run = fwd[16:32] + bwd[16:32] - 1
    in_arc = m & (run >= FAST_ARC)
    return (np.abs(diffs) * in_arc).sum(axis=0)


def fast_score_map(img, threshold, border):
    h, w = img.shape
    out = np.zeros((h, w), np.int32)
    if h < 2 * border + 1 or w < 2 * border + 1:
        return out
    src = img.astype(np.int64)
    center = src[border : h - border, border : w - border]
    diffs = np.stack(
        [
            src[border + dy : h - border + dy, border + dx : w - border + dx] - center
            for dx, dy in zip(CIRCLE_DX, CIRCLE_DY)
        ]
    ).reshape(16, -1)
    bright = _arc_scores(diffs, threshold, 1)
    dark = _arc_scores(diffs, threshold, -1)
    score = np.where(bright > 0, bright, dark)
    out[border : h - border, border : w - border] = score.reshape(center.shape)
    return out


def nms_3x3(score):
    h, w = score.shape
    padded = np.zeros((h + 2, w + 2), score.dtype)
    padded[1:-1, 1:-1] = score
    keep = score > 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nb = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
            earlier = dy < 0 or (dy == 0 and dx < 0)
            keep &= (score >= nb) if not earlier else (score > nb)
    return keep


def patch_moments(img, xs, ys):
    xs = np.asarray(xs, np.int64)
    ys = np.asarray(ys, np.int64)
    vals = img[ys[:, None] + MASK_DY[None, :], xs[:, None] + MASK_DX[None, :]].astype(np.int64)
    out = np.empty((xs.shape[0], 3), np.int64)
    out[:, 0] = vals.sum(axis=1)
    out[:, 1] = vals @ MASK_DX
    out[:, 2] = vals @ MASK_DY
    return out


def gaussian7(img, kernel):
    h, w = img.shape
    padded = np.pad(img.astype(np.int64), 3, mode="edge")
    acc = np.zeros((h, w), np.int64)
    for ky in range(7):
        for kx in range(7):
            acc += kernel[ky, kx] * padded[ky : ky + h, kx : kx + w]
    return ((acc + 512) >> 10).astype(np.uint8)


def descriptors(smoothed, xs, ys, theta_q, luts):
    xs = np.asarray(xs, np.int64)[:, None]
    ys = np.asarray(ys, np.int64)[:, None]
    lut = luts[np.asarray(theta_q, np.int64)]
    a = smoothed[ys + lut[:, :, 1], xs + lut[:, :, 0]]
    b = smoothed[ys + lut[:, :, 3], xs + lut[:, :, 2]]
    return np.packbits(a < b, axis=1, bitorder="little")


def hamming_matrix(a, b):
    x = np.bitwise_xor(a[:, None, :], b[None, :, :])
    return _POP8[x].sum(axis=2, dtype=np.int32)


def sad_profile(left, right, xl, yl, xr, yr, half, slide):
    """SAD at right-window offsets -slide..slide; -1 marks out-of-bounds windows."""
    h, w = left.shape
    hr, wr = right.shape
    out = np.full(2 * slide + 1, -1, np.int64)
    if xl - half < 0 or xl + half >= w or yl - half < 0 or yl + half >= h:
        return out
    if yr - half < 0 or yr + half >= hr:
        return out
    win = left[yl - half : yl + half + 1, xl - half : xl + half + 1].astype(np.int64)
    for k in range(2 * slide + 1):
        cx = xr + k - slide
        if cx - half < 0 or cx + half >= wr:
            continue
        other = right[yr - half : yr + half + 1, cx - half : cx + half + 1].astype(np.int64)
        out[k] = np.abs(win - other).sum()
    return out
