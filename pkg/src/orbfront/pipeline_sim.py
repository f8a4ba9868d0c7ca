"""Discrete-event model of the frame-multiplexed extraction/matching pipeline.

Per chain, one feature-extraction (FE) unit serves the left then the right
image of each frame, and one feature-matching (FM) unit consumes the pair.
A single-frame buffer sits between them: FE may begin frame N+1 only once FM
has picked up frame N. Times are integer nanoseconds.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from statistics import fmean
from typing import NamedTuple

NS_PER_MS = 1_000_000
WARMUP_FRAMES = 3
MIN_FRAMES_FOR_FPS = 10

STAGES = ("FE_L", "FE_R", "FM")
TRACE_CSV_HEADER = ("chain", "frame", "stage", "start_ms", "end_ms")


def ms_to_ns(ms: float) -> int:
    return int(round(ms * NS_PER_MS))


@dataclass(frozen=True)
class StageLatency:
    t_fe: float  # ms per single image
    t_fm: float  # ms per stereo frame

    def __post_init__(self):
        if not (self.t_fe > 0 and self.t_fm > 0):
            raise ValueError("stage latencies must be positive")
        if ms_to_ns(self.t_fe) < 1 or ms_to_ns(self.t_fm) < 1:
            raise ValueError("stage latencies below 1 ns resolution")


class StageEvent(NamedTuple):
    stage: str
    frame: int
    chain: int
    start_ns: int
    end_ns: int

    @property
    def start(self) -> float:
        return self.start_ns / NS_PER_MS

    @property
    def end(self) -> float:
        return self.end_ns / NS_PER_MS


@dataclass(frozen=True)
class PipelineTrace:
    events: tuple[StageEvent, ...]
    frames: int
    chains: int

    def stage_events(self, stage: str, chain: int = 0) -> list[StageEvent]:
        return [e for e in self.events if e.stage == stage and e.chain == chain]


def simulate(lat: StageLatency, frames: int, chains: int = 1) -> PipelineTrace:
    if frames < 1:
        raise ValueError("frames must be >= 1")
    if chains not in (1, 2):
        raise ValueError("chains must be 1 or 2")
    t_fe = ms_to_ns(lat.t_fe)
    t_fm = ms_to_ns(lat.t_fm)
    events: list[StageEvent] = []
    for chain in range(chains):
        fe_free = 0
        fm_free = 0
        buffer_free = 0  # when FM last took the buffered frame
        for n in range(frames):
            fe_l_start = max(fe_free, buffer_free)
            fe_l_end = fe_l_start + t_fe
            fe_r_end = fe_l_end + t_fe
            fm_start = max(fe_r_end, fm_free)
            fm_end = fm_start + t_fm
            events += [
                StageEvent("FE_L", n, chain, fe_l_start, fe_l_end),
                StageEvent("FE_R", n, chain, fe_l_end, fe_r_end),
                StageEvent("FM", n, chain, fm_start, fm_end),
            ]
            fe_free = fe_r_end
            buffer_free = fm_start
            fm_free = fm_end
    events.sort(key=lambda e: (e.start_ns, e.chain, e.frame, STAGES.index(e.stage)))
    return PipelineTrace(tuple(events), frames, chains)


def steady_period_ns(trace: PipelineTrace, chain: int = 0) -> float:
    if trace.frames < MIN_FRAMES_FOR_FPS:
        raise ValueError(f"need at least {MIN_FRAMES_FOR_FPS} frames, got {trace.frames}")
    ends = [e.end_ns for e in trace.stage_events("FM", chain)][WARMUP_FRAMES:]
    gaps = [b - a for a, b in zip(ends, ends[1:])]
    return fmean(gaps)


def throughput(trace: PipelineTrace, chain: int = 0) -> float:
    """Frames per second per chain, from steady-state FM completion gaps."""
    return 1e3 * NS_PER_MS / steady_period_ns(trace, chain)


class LatencyStats(NamedTuple):
    min_ms: float
    mean_ms: float
    max_ms: float
    steady_ms: float  # last frame's latency


def frame_latencies_ns(trace: PipelineTrace, chain: int = 0) -> list[int]:
    starts = {e.frame: e.start_ns for e in trace.stage_events("FE_L", chain)}
    return [e.end_ns - starts[e.frame] for e in sorted(trace.stage_events("FM", chain), key=lambda e: e.frame)]


def latency_report(trace: PipelineTrace, chain: int = 0) -> LatencyStats:
    """End-to-end latency (FM end minus FE_L start) per frame."""
    lat = frame_latencies_ns(trace, chain)
    return LatencyStats(min(lat) / NS_PER_MS, fmean(lat) / NS_PER_MS, max(lat) / NS_PER_MS, lat[-1] / NS_PER_MS)


def trace_csv(trace: PipelineTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_CSV_HEADER)
    for e in sorted(trace.events, key=lambda e: (e.chain, e.frame, STAGES.index(e.stage))):
        w.writerow([e.chain, e.frame, e.stage, f"{e.start_ns / NS_PER_MS:.6f}", f"{e.end_ns / NS_PER_MS:.6f}"])
    return buf.getvalue()


def write_trace_csv(trace: PipelineTrace, path) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(trace_csv(trace))
