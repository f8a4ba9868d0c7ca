import numpy as np

from orbfront.corpus import stereo_pair
from orbfront.extractor import (
    DUMP_RECORD_SIZE,
    ExtractorConfig,
    decode_descriptor_dump,
    encode_descriptor_dump,
    extract,
    extract_image,
    fast_detect,
)
from orbfront.imaging import GrayImage, build_pyramid
from orbfront.kernels import BORDER
from orbfront.orientation import ArithMode

from test_fast import segment_test


def test_constant_pyramid_is_empty(backend):
    img = GrayImage(128, 96, np.full(128 * 96, 10, np.uint8))
    assert extract(build_pyramid(img)) == []


def test_features_valid_and_ordered(backend):
    left, _ = stereo_pair(200, 150, 0, seed=3)
    cfg = ExtractorConfig(max_features_per_level=80)
    pyr = build_pyramid(left)
    feats = extract(pyr, cfg)
    assert feats
    keys = [(fp.level, fp.y, fp.x) for fp, _ in feats]
    assert keys == sorted(keys)
    for fp, desc in feats:
        lv = pyr.levels[fp.level]
        assert BORDER <= fp.x < lv.width - BORDER and BORDER <= fp.y < lv.height - BORDER
        assert 0 <= fp.theta_q < 256 and 0 <= fp.theta_f < 2 * np.pi
        assert len(desc.bits) == 32
        assert segment_test(lv.data, fp.x, fp.y, cfg.fast_threshold) == fp.score
    assert sum(fp.level == 0 for fp, _ in feats) <= 80


def test_budget_keeps_strongest(backend):
    left, _ = stereo_pair(160, 120, 0, seed=5)
    all_corners = fast_detect(left, 20)
    cfg = ExtractorConfig(max_features_per_level=25)
    kept = [fp for fp, _ in extract(build_pyramid(left), cfg) if fp.level == 0]
    assert len(kept) == 25
    expected = sorted(all_corners, key=lambda c: (-c[2], c[1], c[0]))[:25]
    assert sorted((fp.x, fp.y) for fp in kept) == sorted((x, y) for x, y, _ in expected)


def test_backends_give_identical_extraction(rng):
    from orbfront import kernels
    from orbfront.kernels import _KERNELS

    left, _ = stereo_pair(180, 140, 0, seed=8)
    results = []
    for name in ("numba", "numpy"):
        impl = kernels.get_backend(name)
        saved = {k: getattr(kernels, k) for k in _KERNELS}
        try:
            for k in _KERNELS:
                setattr(kernels, k, getattr(impl, k))
            results.append(extract(build_pyramid(left)))
        finally:
            for k, v in saved.items():
                setattr(kernels, k, v)
    assert results[0] == results[1]


def test_fixed8_only_changes_orientation(backend):
    left, _ = stereo_pair(200, 150, 0, seed=11)
    a = extract_image(left, ExtractorConfig(arith_mode=ArithMode.FLOAT))
    b = extract_image(left, ExtractorConfig(arith_mode=ArithMode.FIXED8))
    assert [len(lv) for lv in a.levels] == [len(lv) for lv in b.levels]
    for la, lb in zip(a.levels, b.levels):
        assert np.array_equal(la.xs, lb.xs)
        d = np.abs(la.theta_q - lb.theta_q) % 256
        assert np.minimum(d, 256 - d).max() <= 2
        assert lb.theta_f is None


def test_descriptor_dump_round_trip():
    left, _ = stereo_pair(160, 120, 0, seed=2)
    ext = extract_image(left)
    feats = ext.features()
    buf = encode_descriptor_dump(feats, ext.scale_factor)
    assert len(buf) == DUMP_RECORD_SIZE * len(feats)
    recs = decode_descriptor_dump(buf)
    for (fp, desc), (x, y, level, tq, bits) in zip(feats, recs):
        s = ext.scale_factor**fp.level
        assert x & 7 == 0 and y & 7 == 0
        assert abs((x >> 3) - fp.x * s) <= 0.5 and abs((y >> 3) - fp.y * s) <= 0.5
        assert (level, tq, bits) == (fp.level, fp.theta_q, desc.bits)
