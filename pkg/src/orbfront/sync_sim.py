"""Hardware trigger and unified time-tag simulation for four cameras plus an IMU.

Every sample carries the trigger counter that fired it, so bundles are
assembled by tag and are immune to delivery jitter. ``naive_associate``
groups by arrival time instead, as a CPU-side software sync would.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

CAMERAS = ("Cam0", "Cam1", "Cam2", "Cam3")
IMU = "IMU"
SENSORS = CAMERAS + (IMU,)
NS_PER_S = 1_000_000_000

STREAM_CSV_HEADER = ("sensor", "tag", "capture_ns", "arrival_ns")
BUNDLE_CSV_HEADER = ("tag", "frame_count", "imu_count", "complete")


class SyncConfigError(ValueError):
    pass


class SyncIntegrityError(RuntimeError):
    pass


@dataclass(frozen=True)
class TriggerConfig:
    cam_rate: int = 30
    imu_rate: int = 120

    def __post_init__(self):
        if self.cam_rate <= 0 or self.imu_rate <= 0:
            raise SyncConfigError("rates must be positive")
        if self.imu_rate % self.cam_rate:
            raise SyncConfigError(f"imu_rate {self.imu_rate} is not a multiple of cam_rate {self.cam_rate}")

    @property
    def imu_per_cam(self) -> int:
        return self.imu_rate // self.cam_rate

    @property
    def cam_period_ns(self) -> int:
        return NS_PER_S // self.cam_rate


class TaggedSample(NamedTuple):
    sensor: str
    tag: int
    capture_time: int
    arrival_time: int


@dataclass
class SyncBundle:
    tag: int
    frames: list[TaggedSample] = field(default_factory=list)
    imu: list[TaggedSample] = field(default_factory=list)

    def composition(self) -> tuple:
        return (
            self.tag,
            tuple(sorted((s.sensor, s.tag, s.capture_time) for s in self.frames)),
            tuple(sorted((s.tag, s.capture_time) for s in self.imu)),
        )


def _trigger_times(rate: int, count: int) -> list[int]:
    return [k * NS_PER_S // rate for k in range(count)]


def generate_stream(cfg: TriggerConfig, duration: float, jitter_max: int, seed: int) -> list[TaggedSample]:
    """Capture on the exact trigger grid, arrival = capture + U[0, jitter_max] ns, sorted by arrival."""
    if jitter_max < 0:
        raise ValueError("jitter_max must be >= 0")
    n_cam = int(duration * cfg.cam_rate + 1e-9)
    rng = np.random.default_rng(seed)
    samples = []
    for k, t in enumerate(_trigger_times(cfg.cam_rate, n_cam)):
        for cam in CAMERAS:
            samples.append((cam, k, t))
    for j, t in enumerate(_trigger_times(cfg.imu_rate, n_cam * cfg.imu_per_cam)):
        samples.append((IMU, j, t))
    delays = rng.integers(0, jitter_max, size=len(samples), endpoint=True)
    stream = [TaggedSample(s, tag, t, t + int(d)) for (s, tag, t), d in zip(samples, delays)]
    stream.sort(key=lambda s: (s.arrival_time, SENSORS.index(s.sensor), s.tag))
    return stream


class BundleAssembler:
    """Streaming tag-keyed assembly; emits complete bundles in tag order."""

    def __init__(self, cfg: TriggerConfig | None = None):
        self.cfg = cfg or TriggerConfig()
        self._pending: dict[int, SyncBundle] = {}
        self._seen: set[tuple[str, int]] = set()
        self._next = 0

    def _complete(self, b: SyncBundle) -> bool:
        return len(b.frames) == len(CAMERAS) and len(b.imu) == self.cfg.imu_per_cam

    def push(self, s: TaggedSample) -> list[SyncBundle]:
        key = (s.sensor, s.tag)
        if key in self._seen:
            raise SyncIntegrityError(f"duplicate sample {s.sensor} tag {s.tag}")
        self._seen.add(key)
        bundle_tag = s.tag // self.cfg.imu_per_cam if s.sensor == IMU else s.tag
        b = self._pending.setdefault(bundle_tag, SyncBundle(bundle_tag))
        (b.imu if s.sensor == IMU else b.frames).append(s)
        out = []
        while self._next in self._pending and self._complete(self._pending[self._next]):
            out.append(self._pending.pop(self._next))
            self._next += 1
        return out

    def finish(self) -> tuple[list[SyncBundle], list[SyncBundle]]:
        """Flush at end of stream: (complete bundles held back, incomplete bundles)."""
        complete, incomplete = [], []
        for tag in sorted(self._pending):
            (complete if self._complete(self._pending[tag]) else incomplete).append(self._pending[tag])
        self._pending.clear()
        return complete, incomplete


@dataclass
class AssemblyResult:
    bundles: list[SyncBundle]
    incomplete: list[SyncBundle]

    def compositions(self) -> list[tuple]:
        return [b.composition() for b in self.bundles]


def assemble_bundles(stream: Iterable[TaggedSample], cfg: TriggerConfig | None = None) -> AssemblyResult:
    asm = BundleAssembler(cfg)
    bundles: list[SyncBundle] = []
    for s in stream:
        bundles.extend(asm.push(s))
    late, incomplete = asm.finish()
    bundles.extend(late)
    return AssemblyResult(bundles, incomplete)


class MisAssociation(NamedTuple):
    sensor: str
    tag: int
    true_bundle: int
    assigned_bundle: int
    arrival_time: int


def naive_associate(stream: Sequence[TaggedSample], cfg: TriggerConfig | None = None) -> list[MisAssociation]:
    """Software-sync foil ignoring tags.

    Bundle k opens when the k-th Cam0 image arrives. Other cameras join the
    bundle whose opening time is nearest their arrival; IMU samples join the
    latest bundle opened before they arrive (bundle 0 if none yet).
    """
    cfg = cfg or TriggerConfig()
    opens = np.array([s.arrival_time for s in stream if s.sensor == CAMERAS[0]], dtype=np.int64)
    if opens.size == 0:
        return []
    bad = []
    for s in stream:
        if s.sensor == CAMERAS[0]:
            continue
        if s.sensor == IMU:
            assigned = max(int(np.searchsorted(opens, s.arrival_time, side="right")) - 1, 0)
            truth = s.tag // cfg.imu_per_cam
        else:
            i = int(np.searchsorted(opens, s.arrival_time))
            cands = [c for c in (i - 1, i) if 0 <= c < opens.size]
            assigned = min(cands, key=lambda c: (abs(int(opens[c]) - s.arrival_time), c))
            truth = s.tag
        if assigned != truth:
            bad.append(MisAssociation(s.sensor, s.tag, truth, assigned, s.arrival_time))
    return bad


def stream_csv(stream: Iterable[TaggedSample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STREAM_CSV_HEADER)
    for s in stream:
        w.writerow([s.sensor, s.tag, s.capture_time, s.arrival_time])
    return buf.getvalue()


def bundle_csv(result: AssemblyResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BUNDLE_CSV_HEADER)
    rows = [(b, 1) for b in result.bundles] + [(b, 0) for b in result.incomplete]
    for b, complete in sorted(rows, key=lambda r: r[0].tag):
        w.writerow([b.tag, len(b.frames), len(b.imu), complete])
    return buf.getvalue()
