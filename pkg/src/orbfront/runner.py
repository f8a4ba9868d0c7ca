"""Dataset-level runs behind the CLI: extraction, matching, mode comparison, timing."""
from __future__ import annotations

import json
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import kernels
from .config import RunConfig, load_calib
from .corpus import list_frames, stereo_pair
from .extractor import extract_image, write_descriptor_dump
from .imaging import GrayImage, load_pgm
from .matcher import MatchPair, StereoCalib, match_stereo, write_match_csv
from .orientation import ArithMode


@dataclass
class RunSummary:
    rows: list[dict] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 1 if self.errors else 0


def _atomic_write(path: Path, data: bytes | str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _load_pair(dataset: Path, name: str) -> tuple[GrayImage, GrayImage]:
    paths = [dataset / "left" / name, dataset / "right" / name]
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise FileNotFoundError(f"{name}: missing {', '.join(missing)}")
    return load_pgm(paths[0]), load_pgm(paths[1])


def _map_frames(fn, names, workers: int):
    """Apply ``fn`` per frame; results come back in frame order either way."""
    def safe(name):
        try:
            return name, fn(name), None
        except (OSError, ValueError) as exc:
            return name, None, str(exc)

    if workers <= 1:
        return [safe(n) for n in names]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(safe, names))


def _write_csv_rows(path: Path, header: list[str], rows: list[dict]) -> None:
    lines = [",".join(header)] + [",".join(str(r.get(h, "")) for h in header) for r in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _calib_or_warn(cfg: RunConfig, summary: RunSummary) -> StereoCalib | None:
    if cfg.calib is None:
        summary.warnings.append("no calibration given; depth column marked invalid")
        return None
    try:
        return load_calib(cfg.calib)
    except (OSError, ValueError) as exc:
        summary.warnings.append(f"calibration unusable ({exc}); depth column marked invalid")
        return None


def run_extract(cfg: RunConfig) -> RunSummary:
    summary = RunSummary()
    out = Path(cfg.output_dir)

    def work(name):
        left, right = _load_pair(cfg.dataset_dir, name)
        counts = {}
        for side, img in (("left", left), ("right", right)):
            ext = extract_image(img, cfg.extractor)
            tmp = out / "features" / side / (Path(name).stem + ".desc")
            tmp.parent.mkdir(parents=True, exist_ok=True)
            write_descriptor_dump(ext, tmp.with_name(tmp.name + ".tmp"))
            os.replace(tmp.with_name(tmp.name + ".tmp"), tmp)
            counts[side] = [len(lv) for lv in ext.levels]
        return counts

    for name, counts, err in _map_frames(work, list_frames(cfg.dataset_dir), cfg.workers):
        if err:
            summary.errors.append(err)
            continue
        for side in ("left", "right"):
            summary.rows.append(
                {"frame": name, "side": side, "count": sum(counts[side]), "level0": counts[side][0], "level1": counts[side][1]}
            )
    _write_csv_rows(out / "extract_summary.csv", ["frame", "side", "count", "level0", "level1"], summary.rows)
    return summary


@dataclass
class FrameResult:
    name: str
    features_left: int
    features_right: int
    pairs: list[MatchPair]

    def effective_depths(self, depth_range) -> int:
        return sum(p.effective(depth_range) for p in self.pairs)


def process_frame(left: GrayImage, right: GrayImage, cfg: RunConfig, calib: StereoCalib | None, name: str = "") -> FrameResult:
    el = extract_image(left, cfg.extractor)
    er = extract_image(right, cfg.extractor)
    pairs = match_stereo(el, er, cfg.strip, calib, cfg.matcher)
    return FrameResult(name, len(el), len(er), pairs)


def run_match(cfg: RunConfig) -> RunSummary:
    summary = RunSummary()
    out = Path(cfg.output_dir)
    calib = _calib_or_warn(cfg, summary)

    def work(name):
        left, right = _load_pair(cfg.dataset_dir, name)
        res = process_frame(left, right, cfg, calib, name)
        path = out / "matches" / (Path(name).stem + ".csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        write_match_csv(res.pairs, path.with_name(path.name + ".tmp"))
        os.replace(path.with_name(path.name + ".tmp"), path)
        return res

    for name, res, err in _map_frames(work, list_frames(cfg.dataset_dir), cfg.workers):
        if err:
            summary.errors.append(err)
            continue
        disp = [p.disparity for p in res.pairs]
        summary.rows.append(
            {
                "frame": name,
                "features_left": res.features_left,
                "features_right": res.features_right,
                "pairs": len(res.pairs),
                "effective_depth": res.effective_depths(cfg.matcher.depth_range),
                "mean_disparity": f"{statistics.fmean(disp):.4f}" if disp else "nan",
            }
        )
    _write_csv_rows(
        out / "match_summary.csv",
        ["frame", "features_left", "features_right", "pairs", "effective_depth", "mean_disparity"],
        summary.rows,
    )
    return summary


COMPARE_METRICS = ("feature_points", "matched_pairs", "effective_depth")


@dataclass(frozen=True)
class MetricRow:
    metric: str
    float_mean: float
    fixed_mean: float

    @property
    def rel_error(self) -> float:
        if self.float_mean == 0:
            return 0.0 if self.fixed_mean == 0 else float("inf")
        return abs(self.fixed_mean - self.float_mean) / self.float_mean


@dataclass
class CompareReport:
    rows: list[MetricRow]
    frames: int
    shortfall: int = 0

    def to_csv(self) -> str:
        lines = ["metric,float_mean,fixed_mean,rel_error"]
        lines += [f"{r.metric},{r.float_mean:.4f},{r.fixed_mean:.4f},{r.rel_error:.6f}" for r in self.rows]
        return "\n".join(lines) + "\n"


def _mode_means(cfg: RunConfig, names, calib, mode: ArithMode) -> tuple[list[float], list[str]]:
    mcfg = replace(cfg, extractor=replace(cfg.extractor, arith_mode=mode))
    totals = [0, 0, 0]
    errors = []
    done = 0
    for name, res, err in _map_frames(lambda n: process_frame(*_load_pair(cfg.dataset_dir, n), mcfg, calib, n), names, cfg.workers):
        if err:
            errors.append(err)
            continue
        done += 1
        totals[0] += res.features_left + res.features_right
        totals[1] += len(res.pairs)
        totals[2] += res.effective_depths(cfg.matcher.depth_range)
    return [t / done if done else 0.0 for t in totals], errors


def run_compare(cfg: RunConfig, frames: int = 30, modes=(ArithMode.FLOAT, ArithMode.FIXED8)) -> tuple[CompareReport, RunSummary]:
    """Means per frame of the three accuracy metrics, reference mode vs candidate mode.

    Feature points count both views of a frame.
    """
    summary = RunSummary()
    names = list_frames(cfg.dataset_dir)[:frames]
    shortfall = max(0, frames - len(names))
    if shortfall:
        summary.warnings.append(f"dataset has {len(names)} frames, {frames} requested")
    calib = _calib_or_warn(cfg, summary)
    ref, err_a = _mode_means(cfg, names, calib, modes[0])
    cand, err_b = _mode_means(cfg, names, calib, modes[1])
    summary.errors.extend(sorted(set(err_a + err_b)))
    report = CompareReport([MetricRow(m, a, b) for m, a, b in zip(COMPARE_METRICS, ref, cand)], len(names), shortfall)
    _atomic_write(Path(cfg.output_dir) / "compare.csv", report.to_csv())
    return report, summary


BENCH_RESOLUTIONS = ((640, 480), (1280, 720))


def _time_ms(fn) -> tuple[float, object]:
    t0 = time.perf_counter()
    res = fn()
    return (time.perf_counter() - t0) * 1e3, res


def bench_pairs(pairs: list[tuple[GrayImage, GrayImage]], cfg: RunConfig, repeats: int = 3) -> dict:
    """Per-stage wall times: FE per single image, FM per stereo frame."""
    calib = StereoCalib(500.0, 0.1)
    # JIT warm-up, not timed.
    el = extract_image(pairs[0][0], cfg.extractor)
    match_stereo(el, el, cfg.strip, calib, cfg.matcher)
    fe_runs, fm_runs = [], []
    for _ in range(repeats):
        fe, fm = [], []
        for left, right in pairs:
            t_l, el = _time_ms(lambda: extract_image(left, cfg.extractor))
            t_r, er = _time_ms(lambda: extract_image(right, cfg.extractor))
            t_m, _ = _time_ms(lambda: match_stereo(el, er, cfg.strip, calib, cfg.matcher))
            fe += [t_l, t_r]
            fm.append(t_m)
        fe_runs.append(fe)
        fm_runs.append(fm)

    def stats(runs):
        flat = [t for r in runs for t in r]
        means = [statistics.fmean(r) for r in runs]
        return {
            "mean_ms": statistics.fmean(flat),
            "median_ms": statistics.median(flat),
            "repeat_means_ms": means,
            "repeat_stdev_ms": statistics.stdev(means) if len(means) > 1 else 0.0,
        }

    return {"FE": stats(fe_runs), "FM": stats(fm_runs), "frames": len(pairs)}


def run_bench(cfg: RunConfig, repeats: int = 3, synthetic_frames: int = 2, use_dataset: bool = True) -> tuple[dict, RunSummary]:
    summary = RunSummary()
    groups: dict[tuple[int, int], list] = {}
    if use_dataset and (Path(cfg.dataset_dir) / "left").is_dir():
        for name in list_frames(cfg.dataset_dir):
            try:
                left, right = _load_pair(cfg.dataset_dir, name)
            except (OSError, ValueError) as exc:
                summary.errors.append(str(exc))
                continue
            groups.setdefault((left.width, left.height), []).append((left, right))
    else:
        for w, h in BENCH_RESOLUTIONS:
            groups[(w, h)] = [stereo_pair(w, h, 12, seed) for seed in range(synthetic_frames)]
    report = {
        "backend": kernels.BACKEND,
        "repeats": repeats,
        "resolutions": {f"{w}x{h}": bench_pairs(p, cfg, repeats) for (w, h), p in sorted(groups.items())},
    }
    _atomic_write(Path(cfg.output_dir) / "bench.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report, summary


def format_bench(report: dict) -> str:
    lines = [f"backend: {report['backend']}  repeats: {report['repeats']}", "resolution  stage  mean_ms  median_ms  stdev_of_repeat_means"]
    for res, stages in report["resolutions"].items():
        for stage in ("FE", "FM"):
            s = stages[stage]
            lines.append(f"{res:<11} {stage:<5} {s['mean_ms']:8.2f} {s['median_ms']:10.2f} {s['repeat_stdev_ms']:10.3f}")
    return "\n".join(lines)
