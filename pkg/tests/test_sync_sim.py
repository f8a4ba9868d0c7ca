import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbfront.sync_sim import (
    BUNDLE_CSV_HEADER,
    CAMERAS,
    IMU,
    BundleAssembler,
    SyncConfigError,
    SyncIntegrityError,
    TaggedSample,
    TriggerConfig,
    assemble_bundles,
    bundle_csv,
    generate_stream,
    naive_associate,
    stream_csv,
)

CFG = TriggerConfig()


def test_jitter_free_counts():
    s = generate_stream(CFG, 1.0, 0, seed=0)
    counts = Counter(x.sensor for x in s)
    assert counts == {**{c: 30 for c in CAMERAS}, IMU: 120}
    assert all(x.arrival_time == x.capture_time for x in s)


def test_rate_ratio_must_be_integer():
    with pytest.raises(SyncConfigError):
        TriggerConfig(30, 100)
    with pytest.raises(ValueError):
        generate_stream(CFG, 1.0, -1, 0)


def test_stream_deterministic_and_sorted():
    a = generate_stream(CFG, 1.0, 5_000_000, seed=7)
    assert stream_csv(a) == stream_csv(generate_stream(CFG, 1.0, 5_000_000, seed=7))
    assert [x.arrival_time for x in a] == sorted(x.arrival_time for x in a)
    assert all(0 <= x.arrival_time - x.capture_time <= 5_000_000 for x in a)


def test_jitter_free_bundles_in_order():
    res = assemble_bundles(generate_stream(CFG, 1.0, 0, 0))
    assert [b.tag for b in res.bundles] == list(range(30))
    assert not res.incomplete


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.0, 0.99))
def test_jitter_invariance(seed, frac):
    jitter = int(frac * CFG.cam_period_ns)
    ref = assemble_bundles(generate_stream(CFG, 0.5, 0, seed)).compositions()
    assert assemble_bundles(generate_stream(CFG, 0.5, jitter, seed)).compositions() == ref


def test_tag_coherence():
    res = assemble_bundles(generate_stream(CFG, 1.0, 16_000_000, 3))
    for b in res.bundles:
        assert sorted(f.sensor for f in b.frames) == list(CAMERAS)
        assert {f.tag for f in b.frames} == {b.tag}
        assert sorted(i.tag for i in b.imu) == list(range(b.tag * 4, b.tag * 4 + 4))


def test_naive_baseline_fails_under_jitter():
    s = generate_stream(CFG, 1.0, 16_000_000, 0)
    assert naive_associate(s)
    assert naive_associate(generate_stream(CFG, 1.0, 0, 0)) == []


def test_duplicate_sample_rejected():
    asm = BundleAssembler()
    asm.push(TaggedSample("Cam1", 0, 0, 0))
    with pytest.raises(SyncIntegrityError):
        asm.push(TaggedSample("Cam1", 0, 0, 5))


def test_shuffled_arrival_still_emits_in_tag_order():
    s = generate_stream(CFG, 1.0, 0, 0)
    random.Random(4).shuffle(s)
    res = assemble_bundles(s)
    assert [b.tag for b in res.bundles] == list(range(30))


def test_conservation_with_truncated_stream():
    s = generate_stream(CFG, 1.0, 20_000_000, 9)
    cut = s[: len(s) - 7]
    res = assemble_bundles(cut)
    placed = [x for b in res.bundles + res.incomplete for x in b.frames + b.imu]
    assert sorted(placed) == sorted(cut)
    assert res.incomplete
    assert all(b.tag > max(c.tag for c in res.bundles) for b in res.incomplete)


def test_bundle_csv():
    res = assemble_bundles(generate_stream(CFG, 1.0, 0, 0)[:-2])
    lines = bundle_csv(res).splitlines()
    assert lines[0] == ",".join(BUNDLE_CSV_HEADER)
    assert lines[1] == "0,4,4,1"
    assert lines[-1].endswith(",0")
