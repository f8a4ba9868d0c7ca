"""Loop kernels compiled with numba."""
import numpy as np
from numba import njit

from ._tables import CIRCLE_DX, CIRCLE_DY, FAST_ARC, MASK_HALF_WIDTH, PATCH_RADIUS

_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.int32)


@njit(cache=True)
def _arc_score(diff, threshold, sign):
    n = 16
    start = -1
    for k in range(n):
        if not sign * diff[k] > threshold:
            start = k
            break
    if start < 0:
        total = 0
        for k in range(n):
            total += abs(diff[k])
        return total
    run = 0
    acc = 0
    for step in range(1, n + 1):
        k = (start + step) % n
        if sign * diff[k] > threshold:
            run += 1
            acc += abs(diff[k])
        else:
            if run >= FAST_ARC:
                return acc
            run = 0
            acc = 0
    return 0


@njit(cache=True)
def fast_score_map(img, threshold, border):
    h, w = img.shape
    out = np.zeros((h, w), np.int32)
    if h < 2 * border + 1 or w < 2 * border + 1:
        return out
    diff = np.empty(16, np.int64)
    for y in range(border, h - border):
        for x in range(border, w - border):
            c = np.int64(img[y, x])
            # 9 contiguous pixels always cover two adjacent compass points.
            nb = 0
            nd = 0
            for k in range(0, 16, 4):
                d = np.int64(img[y + CIRCLE_DY[k], x + CIRCLE_DX[k]]) - c
                if d > threshold:
                    nb += 1
                elif d < -threshold:
                    nd += 1
            if nb < 2 and nd < 2:
                continue
            for k in range(16):
                diff[k] = np.int64(img[y + CIRCLE_DY[k], x + CIRCLE_DX[k]]) - c
            s = 0
            if nb >= 2:
                s = _arc_score(diff, threshold, 1)
            if s == 0 and nd >= 2:
                s = _arc_score(diff, threshold, -1)
            out[y, x] = s
    return out


@njit(cache=True)
def nms_3x3(score):
    h, w = score.shape
    keep = np.zeros((h, w), np.bool_)
    for y in range(h):
        for x in range(w):
            s = score[y, x]
            if s <= 0:
                continue
            ok = True
            for dy in range(-1, 2):
                yy = y + dy
                if yy < 0 or yy >= h:
                    continue
                for dx in range(-1, 2):
                    xx = x + dx
                    if (dy == 0 and dx == 0) or xx < 0 or xx >= w:
                        continue
                    n = score[yy, xx]
                    earlier = dy < 0 or (dy == 0 and dx < 0)
                    if n > s or (n == s and earlier):
                        ok = False
                        break
                if not ok:
                    break
            keep[y, x] = ok
    return keep


@njit(cache=True)
def patch_moments(img, xs, ys):
    n = xs.shape[0]
    out = np.zeros((n, 3), np.int64)
    for i in range(n):
        cx = xs[i]
        cy = ys[i]
        m00 = 0
        m10 = 0
        m01 = 0
        for r in range(2 * PATCH_RADIUS + 1):
            dy = r - PATCH_RADIUS
            hw = MASK_HALF_WIDTH[r]
            row_sum = 0
            for dx in range(-hw, hw + 1):
                v = np.int64(img[cy + dy, cx + dx])
                row_sum += v
                m10 += dx * v
            m00 += row_sum
            m01 += dy * row_sum
        out[i, 0] = m00
        out[i, 1] = m10
        out[i, 2] = m01
    return out


@njit(cache=True)
def gaussian7(img, kernel):
    h, w = img.shape
    out = np.empty((h, w), np.uint8)
    for y in range(h):
        for x in range(w):
            acc = 0
            for ky in range(7):
                yy = min(max(y + ky - 3, 0), h - 1)
                for kx in range(7):
                    xx = min(max(x + kx - 3, 0), w - 1)
                    acc += kernel[ky, kx] * np.int64(img[yy, xx])
            out[y, x] = (acc + 512) >> 10
    return out


@njit(cache=True)
def descriptors(smoothed, xs, ys, theta_q, luts):
    n = xs.shape[0]
    npairs = luts.shape[1]
    out = np.zeros((n, npairs // 8), np.uint8)
    for i in range(n):
        lut = luts[theta_q[i]]
        cx = xs[i]
        cy = ys[i]
        for j in range(npairs):
            a = smoothed[cy + lut[j, 1], cx + lut[j, 0]]
            b = smoothed[cy + lut[j, 3], cx + lut[j, 2]]
            if a < b:
                out[i, j >> 3] |= np.uint8(1 << (j & 7))
    return out


@njit(cache=True)
def hamming_matrix(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    nbytes = a.shape[1]
    out = np.empty((na, nb), np.int32)
    for i in range(na):
        for j in range(nb):
            d = 0
            for k in range(nbytes):
                d += _POP8[a[i, k] ^ b[j, k]]
            out[i, j] = d
    return out


@njit(cache=True)
def sad_profile(left, right, xl, yl, xr, yr, half, slide):
    """SAD at right-window offsets -slide..slide; -1 marks out-of-bounds windows."""
    h, w = left.shape
    hr, wr = right.shape
    out = np.full(2 * slide + 1, -1, np.int64)
    if xl - half < 0 or xl + half >= w or yl - half < 0 or yl + half >= h:
        return out
    if yr - half < 0 or yr + half >= hr:
        return out
    for k in range(2 * slide + 1):
        cx = xr + k - slide
        if cx - half < 0 or cx + half >= wr:
            continue
        acc = 0
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                acc += abs(np.int64(left[yl + dy, xl + dx]) - np.int64(right[yr + dy, cx + dx]))
        out[k] = acc
    return out
