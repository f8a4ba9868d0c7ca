"""Time each hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py --width 640 --height 480 --repeats 5

Results of the two backends are checked for equality before timing.
"""
import argparse
import statistics
import time

import numpy as np

from orbfront import kernels
from orbfront.corpus import stereo_pair
from orbfront.extractor import GAUSS_KERNEL
from orbfront.pattern import default_pattern


def _cases(width, height):
    left, right = stereo_pair(width, height, 12, seed=0)
    l, r = left.data, right.data
    score = kernels.get_backend("numpy").fast_score_map(l, 20, kernels.BORDER)
    ys, xs = np.nonzero(kernels.get_backend("numpy").nms_3x3(score))
    xs, ys = xs[:1200].astype(np.int64), ys[:1200].astype(np.int64)
    tq = (xs * 7 + ys) % 256
    luts = default_pattern().rotated_luts
    desc = kernels.get_backend("numpy").descriptors(l, xs, ys, tq, luts)
    return {
        "fast_score_map": lambda k: k.fast_score_map(l, 20, kernels.BORDER),
        "nms_3x3": lambda k: k.nms_3x3(score),
        "patch_moments": lambda k: k.patch_moments(l, xs, ys),
        "gaussian7": lambda k: k.gaussian7(l, GAUSS_KERNEL),
        "descriptors": lambda k: k.descriptors(l, xs, ys, tq, luts),
        "hamming_matrix": lambda k: k.hamming_matrix(desc, desc),
        "sad_profile": lambda k: [k.sad_profile(l, r, int(x), int(y), int(x) - 12, int(y), 5, 5) for x, y in zip(xs[:300], ys[:300])],
    }


def _best_ms(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return min(times), statistics.median(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=640)
    ap.add_argument("--height", type=int, default=480)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)

    nb, npy = kernels.get_backend("numba"), kernels.get_backend("numpy")
    cases = _cases(args.width, args.height)
    print(f"{args.width}x{args.height}, best/median of {args.repeats} runs (ms)")
    print(f"{'kernel':<16}{'numba':>18}{'numpy':>20}{'speedup':>10}")
    for name, run in cases.items():
        a, b = run(nb), run(npy)  # also JIT warm-up
        assert all(np.array_equal(x, y) for x, y in zip(a, b)) if isinstance(a, list) else np.array_equal(a, b), name
        t_nb = _best_ms(lambda: run(nb), args.repeats)
        t_np = _best_ms(lambda: run(npy), args.repeats)
        print(f"{name:<16}{t_nb[0]:9.2f}/{t_nb[1]:<8.2f}{t_np[0]:10.2f}/{t_np[1]:<9.2f}{t_np[0] / t_nb[0]:8.1f}x")


if __name__ == "__main__":
    main()
