"""The numba and numpy backends must agree bit for bit."""
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from orbfront import kernels
from orbfront.extractor import GAUSS_KERNEL
from orbfront.pattern import default_pattern

from conftest import BACKEND_NAMES

pytestmark = pytest.mark.skipif(len(BACKEND_NAMES) < 2, reason="numba not installed")


@pytest.fixture(scope="module")
def both():
    return kernels.get_backend("numba"), kernels.get_backend("numpy")


images = arrays(np.uint8, st.tuples(st.integers(33, 60), st.integers(33, 60)))


@settings(max_examples=25, deadline=None)
@given(images, st.integers(1, 60))
def test_fast_and_nms_agree(both, img, t):
    nb, npy = both
    a = nb.fast_score_map(img, t, 16)
    b = npy.fast_score_map(img, t, 16)
    assert np.array_equal(a, b)
    assert np.array_equal(nb.nms_3x3(a), npy.nms_3x3(a))


def test_plateau_nms_agree(both):
    nb, npy = both
    s = np.zeros((8, 8), np.int32)
    s[2:5, 2:5] = 7
    s[6, 6] = 3
    assert np.array_equal(nb.nms_3x3(s), npy.nms_3x3(s))
    assert nb.nms_3x3(s).sum() == 2 and nb.nms_3x3(s)[2, 2]


@settings(max_examples=20, deadline=None)
@given(images, st.data())
def test_moments_descriptors_smoothing_agree(both, img, data):
    nb, npy = both
    h, w = img.shape
    n = data.draw(st.integers(0, 12))
    xs = np.array(data.draw(st.lists(st.integers(16, w - 17), min_size=n, max_size=n)), np.int64)
    ys = np.array(data.draw(st.lists(st.integers(16, h - 17), min_size=n, max_size=n)), np.int64)
    tq = np.array(data.draw(st.lists(st.integers(0, 255), min_size=n, max_size=n)), np.int64)
    assert np.array_equal(nb.patch_moments(img, xs, ys), npy.patch_moments(img, xs, ys))
    luts = default_pattern().rotated_luts
    assert np.array_equal(nb.descriptors(img, xs, ys, tq, luts), npy.descriptors(img, xs, ys, tq, luts))
    assert np.array_equal(nb.gaussian7(img, GAUSS_KERNEL), npy.gaussian7(img, GAUSS_KERNEL))


@settings(max_examples=20, deadline=None)
@given(
    arrays(np.uint8, st.tuples(st.integers(0, 20), st.just(32))),
    arrays(np.uint8, st.tuples(st.integers(0, 20), st.just(32))),
)
def test_hamming_agree(both, a, b):
    nb, npy = both
    assert np.array_equal(nb.hamming_matrix(a, b), npy.hamming_matrix(a, b))


@settings(max_examples=25, deadline=None)
@given(images, st.integers(0, 60), st.integers(0, 60), st.integers(0, 60), st.integers(-2, 2))
def test_sad_profile_agree(both, img, xl, yl, xr, dy):
    nb, npy = both
    right = np.roll(img, 3, axis=1)
    args = (img, right, xl, yl, xr, yl + dy, 5, 5)
    assert np.array_equal(nb.sad_profile(*args), npy.sad_profile(*args))


def test_env_flag_selects_numpy():
    code = "import orbfront.kernels as k; print(k.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={**__import__("os").environ, "ORBFRONT_DISABLE_NUMBA": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
