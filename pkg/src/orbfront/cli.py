"""Command-line entry point: ``orbfront <subcommand>``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pipeline_sim, runner, sync_sim
from .config import RUN_KEYS, ConfigError, RunConfig, load_kv
from .corpus import generate_corpus

_RUN_FLAGS = {
    "dataset_dir": ("--dataset", str),
    "output_dir": ("--output", str),
    "calib": ("--calib", str),
    "arith_mode": ("--arith-mode", str),
    "fast_threshold": ("--fast-threshold", int),
    "max_features_per_level": ("--max-features", int),
    "scale_factor": ("--scale-factor", float),
    "row_tolerance": ("--row-tolerance", int),
    "min_disparity": ("--min-disparity", int),
    "max_disparity": ("--max-disparity", int),
    "max_hamming": ("--max-hamming", int),
    "slide": ("--slide", int),
    "min_depth": ("--min-depth", float),
    "max_depth": ("--max-depth", float),
    "workers": ("--workers", int),
}


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value run config; flags override it")
    for key, (flag, typ) in _RUN_FLAGS.items():
        kwargs = {"dest": key, "type": typ, "default": None}
        if key == "arith_mode":
            kwargs["choices"] = ["float", "fixed8"]
        p.add_argument(flag, **kwargs)


def _run_config(args) -> RunConfig:
    values = load_kv(args.config, RUN_KEYS) if args.config else {}
    values.update({k: getattr(args, k) for k in _RUN_FLAGS if getattr(args, k) is not None})
    return RunConfig.from_values(values)


def _report(summary: runner.RunSummary) -> int:
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for e in summary.errors:
        print(f"error: {e}", file=sys.stderr)
    return summary.exit_code


def cmd_extract(args) -> int:
    cfg = _run_config(args)
    summary = runner.run_extract(cfg)
    frames = {r["frame"] for r in summary.rows}
    for r in summary.rows:
        print(f"{r['frame']} {r['side']} {r['count']}")
    print(f"frames: {len(frames)}")
    return _report(summary)


def cmd_match(args) -> int:
    cfg = _run_config(args)
    summary = runner.run_match(cfg)
    for r in summary.rows:
        print(f"{r['frame']} pairs={r['pairs']} effective_depth={r['effective_depth']} mean_disparity={r['mean_disparity']}")
    print(f"frames: {len(summary.rows)}")
    return _report(summary)


def cmd_compare(args) -> int:
    cfg = _run_config(args)
    report, summary = runner.run_compare(cfg, args.frames)
    print(f"frames: {report.frames}")
    print(f"{'metric':<16}{'float':>12}{'fixed8':>12}{'rel_err':>10}")
    for r in report.rows:
        print(f"{r.metric:<16}{r.float_mean:12.2f}{r.fixed_mean:12.2f}{100 * r.rel_error:9.3f}%")
    return _report(summary)


def cmd_pipeline_sim(args) -> int:
    lat = pipeline_sim.StageLatency(args.t_fe, args.t_fm)
    trace = pipeline_sim.simulate(lat, args.frames, args.chains)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    pipeline_sim.write_trace_csv(trace, out / "trace.csv")
    lat_stats = pipeline_sim.latency_report(trace)
    if args.frames >= pipeline_sim.MIN_FRAMES_FOR_FPS:
        print(f"fps: {pipeline_sim.throughput(trace):.3f}")
    else:
        print(f"fps: n/a (need >= {pipeline_sim.MIN_FRAMES_FOR_FPS} frames)")
    print(
        f"latency_ms: min={lat_stats.min_ms:.3f} mean={lat_stats.mean_ms:.3f} "
        f"max={lat_stats.max_ms:.3f} steady={lat_stats.steady_ms:.3f}"
    )
    return 0


def sync_verdict(cfg: sync_sim.TriggerConfig, duration: float, jitter: int, seed: int) -> tuple[str, bool]:
    if jitter == 0:
        return "invariant: trivially true", True
    base = sync_sim.assemble_bundles(sync_sim.generate_stream(cfg, duration, 0, seed), cfg)
    jit = sync_sim.assemble_bundles(sync_sim.generate_stream(cfg, duration, jitter, seed), cfg)
    if base.compositions() == jit.compositions():
        return "bundle composition identical to jitter-free", True
    return "bundle composition differs from jitter-free", False


def cmd_sync_sim(args) -> int:
    cfg = sync_sim.TriggerConfig(args.cam_rate, args.imu_rate)
    stream = sync_sim.generate_stream(cfg, args.duration, args.jitter, args.seed)
    result = sync_sim.assemble_bundles(stream, cfg)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "stream.csv").write_text(sync_sim.stream_csv(stream), encoding="ascii")
    (out / "bundles.csv").write_text(sync_sim.bundle_csv(result), encoding="ascii")
    verdict, ok = sync_verdict(cfg, args.duration, args.jitter, args.seed)
    print(f"samples: {len(stream)} bundles: {len(result.bundles)} incomplete: {len(result.incomplete)}")
    print(f"verdict: {verdict}")
    if args.naive:
        for seed in range(args.seed, args.seed + args.naive_seeds):
            s = sync_sim.generate_stream(cfg, args.duration, args.jitter, seed)
            bad = sync_sim.naive_associate(s, cfg)
            if bad:
                b = bad[0]
                print(
                    f"naive: {len(bad)} mis-associations at seed {seed}; first {b.sensor} tag {b.tag} "
                    f"arrived {b.arrival_time} ns, assigned bundle {b.assigned_bundle} (true {b.true_bundle})"
                )
                break
        else:
            print(f"naive: no mis-association in seeds {args.seed}..{args.seed + args.naive_seeds - 1}")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    cfg = _run_config(args)
    report, summary = runner.run_bench(cfg, args.repeats, use_dataset=args.dataset_dir is not None or bool(args.config))
    print(runner.format_bench(report))
    return _report(summary)


def cmd_gen_corpus(args) -> int:
    out = generate_corpus(args.output, args.frames, args.width, args.height, args.shift, args.seed, args.identical)
    print(f"wrote {args.frames} stereo frames to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbfront", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("extract", cmd_extract, "extract features and write descriptor dumps"),
        ("match", cmd_match, "extract and stereo-match every frame, write match CSVs"),
        ("compare", cmd_compare, "float vs fixed8 accuracy metrics"),
        ("bench", cmd_bench, "per-stage wall time"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_run_options(p)
        p.set_defaults(func=fn)
        if name == "compare":
            p.add_argument("--frames", type=int, default=30)
        if name == "bench":
            p.add_argument("--repeats", type=int, default=3)

    p = sub.add_parser("pipeline-sim", help="frame-multiplexed pipeline throughput")
    p.add_argument("--t-fe", type=float, default=7.28, help="ms per image")
    p.add_argument("--t-fm", type=float, default=14.59, help="ms per stereo frame")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--chains", type=int, choices=[1, 2], default=1)
    p.add_argument("--output", default="out")
    p.set_defaults(func=cmd_pipeline_sim)

    p = sub.add_parser("sync-sim", help="trigger/tag synchronization simulation")
    p.add_argument("--cam-rate", type=int, default=30)
    p.add_argument("--imu-rate", type=int, default=120)
    p.add_argument("--duration", type=float, default=1.0, help="seconds")
    p.add_argument("--jitter", type=int, default=0, help="max delivery delay, ns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--naive", action="store_true", help="also run the arrival-time baseline")
    p.add_argument("--naive-seeds", type=int, default=50)
    p.add_argument("--output", default="out")
    p.set_defaults(func=cmd_sync_sim)

    p = sub.add_parser("gen-corpus", help="write a synthetic stereo dataset")
    p.add_argument("output")
    p.add_argument("--frames", type=int, default=30)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--shift", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--identical", action="store_true", help="right view equals left view")
    p.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, sync_sim.SyncConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
