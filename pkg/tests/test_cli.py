import csv
import json

import numpy as np
import pytest

from orbfront.cli import main, sync_verdict
from orbfront.config import ConfigError, RunConfig, parse_kv, RUN_KEYS
from orbfront.corpus import frame_name, generate_corpus
from orbfront.imaging import GrayImage, save_pgm
from orbfront.orientation import ArithMode
from orbfront.runner import run_bench, run_compare
from orbfront.sync_sim import TriggerConfig


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def corpus(tmp_path):
    return generate_corpus(tmp_path / "data", frames=3, width=192, height=144, shift=12, seed=1)


def test_gen_corpus_layout(corpus):
    assert sorted(p.name for p in (corpus / "left").iterdir()) == [frame_name(i) for i in range(3)]
    assert (corpus / "calib.txt").read_text().split() == ["fx", "=", "500.0", "baseline", "=", "0.1"]


def test_extract_and_match(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["extract", "--dataset", str(corpus), "--output", str(out)]) == 0
    assert len(list((out / "features" / "left").glob("*.desc"))) == 3
    assert main(["match", "--dataset", str(corpus), "--output", str(out)]) == 0
    rows = _rows(out / "match_summary.csv")
    assert [r["frame"] for r in rows] == [frame_name(i) for i in range(3)]
    for r in rows:
        assert abs(float(r["mean_disparity"]) - 12) <= 0.5
        assert int(r["effective_depth"]) > 0
    assert "frames: 3" in capsys.readouterr().out


def test_empty_dataset(tmp_path, capsys):
    (tmp_path / "d" / "left").mkdir(parents=True)
    (tmp_path / "d" / "right").mkdir()
    assert main(["extract", "--dataset", str(tmp_path / "d"), "--output", str(tmp_path / "o")]) == 0
    assert "frames: 0" in capsys.readouterr().out
    assert _rows(tmp_path / "o" / "extract_summary.csv") == []


def test_constant_dataset(tmp_path):
    for side in ("left", "right"):
        (tmp_path / "d" / side).mkdir(parents=True)
        save_pgm(GrayImage(96, 80, np.full(96 * 80, 77, np.uint8)), tmp_path / "d" / side / "a.pgm")
    assert main(["extract", "--dataset", str(tmp_path / "d"), "--output", str(tmp_path / "o")]) == 0
    assert [int(r["count"]) for r in _rows(tmp_path / "o" / "extract_summary.csv")] == [0, 0]


def test_missing_frame_is_reported_and_run_continues(corpus, tmp_path, capsys):
    (corpus / "right" / frame_name(1)).unlink()
    out = tmp_path / "out"
    assert main(["extract", "--dataset", str(corpus), "--output", str(out)]) == 1
    assert frame_name(1) in capsys.readouterr().err
    assert len(_rows(out / "extract_summary.csv")) == 4


def test_missing_calibration_warns(corpus, tmp_path, capsys):
    (corpus / "calib.txt").unlink()
    out = tmp_path / "out"
    assert main(["match", "--dataset", str(corpus), "--output", str(out)]) == 0
    assert "warning" in capsys.readouterr().err
    depths = {r["depth"] for r in _rows(out / "matches" / "frame_0000.csv")}
    assert depths == {"nan"}


def test_identical_views(tmp_path):
    data = generate_corpus(tmp_path / "d", frames=1, width=192, height=144, seed=2, identical=True)
    out = tmp_path / "o"
    assert main(["match", "--dataset", str(data), "--output", str(out), "--min-disparity", "0"]) == 0
    rows = _rows(out / "matches" / "frame_0000.csv")
    assert rows and all(float(r["disparity"]) == 0 for r in rows)
    assert _rows(out / "match_summary.csv")[0]["effective_depth"] == "0"


def test_compare_self_and_modes(corpus, tmp_path):
    cfg = RunConfig.from_values({"dataset_dir": str(corpus), "output_dir": str(tmp_path / "o")})
    rep, summary = run_compare(cfg, frames=5, modes=(ArithMode.FLOAT, ArithMode.FLOAT))
    assert len(rep.rows) == 3 and all(r.rel_error == 0 for r in rep.rows)
    assert rep.shortfall == 2 and summary.warnings and summary.exit_code == 0
    rep, _ = run_compare(cfg, frames=3)
    assert [r.metric for r in rep.rows] == ["feature_points", "matched_pairs", "effective_depth"]
    assert (tmp_path / "o" / "compare.csv").read_text().count("\n") == 4


def test_pipeline_sim_cli(tmp_path, capsys):
    assert main(["pipeline-sim", "--output", str(tmp_path)]) == 0
    fps = float(capsys.readouterr().out.split("fps: ")[1].split()[0])
    assert 68 <= fps <= 69
    assert main(["pipeline-sim", "--t-fe", "5", "--t-fm", "0.001", "--output", str(tmp_path)]) == 0
    assert "fps: 100.000" in capsys.readouterr().out
    assert (tmp_path / "trace.csv").is_file()


def test_sync_sim_cli(tmp_path, capsys):
    assert main(["sync-sim", "--output", str(tmp_path)]) == 0
    assert "invariant: trivially true" in capsys.readouterr().out
    assert main(["sync-sim", "--jitter", "16000000", "--naive", "--output", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "identical to jitter-free" in out and "naive: " in out and "mis-associations at seed" in out
    assert main(["sync-sim", "--imu-rate", "100", "--output", str(tmp_path)]) == 2


def test_sync_verdict_values():
    assert sync_verdict(TriggerConfig(), 0.5, 0, 1) == ("invariant: trivially true", True)
    assert sync_verdict(TriggerConfig(), 0.5, 30_000_000, 1)[1]


def test_config_file_and_flag_override(corpus, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text(f"# run\ndataset_dir = {corpus}\noutput_dir = {tmp_path / 'a'}\nmax_features_per_level = 10\n")
    assert main(["extract", "--config", str(conf)]) == 0
    assert max(int(r["level0"]) for r in _rows(tmp_path / "a" / "extract_summary.csv")) <= 10
    assert main(["extract", "--config", str(conf), "--max-features", "20", "--output", str(tmp_path / "b")]) == 0
    assert max(int(r["level0"]) for r in _rows(tmp_path / "b" / "extract_summary.csv")) > 10


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_kv("nope = 1", RUN_KEYS)
    with pytest.raises(ConfigError):
        parse_kv("workers = many", RUN_KEYS)
    conf = tmp_path / "bad.conf"
    conf.write_text("fast_threshold 3\n")
    assert main(["extract", "--config", str(conf)]) == 2


def test_workers_do_not_change_outputs(corpus, tmp_path):
    for w in ("1", "3"):
        assert main(["match", "--dataset", str(corpus), "--output", str(tmp_path / w), "--workers", w]) == 0
    for f in ("match_summary.csv", "matches/frame_0002.csv"):
        assert (tmp_path / "1" / f).read_bytes() == (tmp_path / "3" / f).read_bytes()


def test_bench_report(tmp_path, capsys):
    cfg = RunConfig.from_values({"output_dir": str(tmp_path)})
    report, summary = run_bench(cfg, repeats=2, synthetic_frames=1, use_dataset=False)
    assert set(report["resolutions"]) == {"640x480", "1280x720"}
    for stages in report["resolutions"].values():
        assert {"FE", "FM"} <= set(stages)
        assert len(stages["FE"]["repeat_means_ms"]) == 2
    assert json.loads((tmp_path / "bench.json").read_text()) == report
