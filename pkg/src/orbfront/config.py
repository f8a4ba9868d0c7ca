"""``key = value`` config files for runs and stereo calibration.

Blank lines and ``#`` comments are ignored. Unknown keys are rejected so a
typo never silently falls back to a default.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .extractor import ExtractorConfig
from .matcher import DEPTH_RANGE, MatcherConfig, SearchStrip, StereoCalib
from .orientation import ArithMode


class ConfigError(ValueError):
    pass


RUN_KEYS = {
    "dataset_dir": str,
    "output_dir": str,
    "calib": str,
    "arith_mode": str,
    "fast_threshold": int,
    "max_features_per_level": int,
    "scale_factor": float,
    "row_tolerance": int,
    "min_disparity": int,
    "max_disparity": int,
    "max_hamming": int,
    "slide": int,
    "min_depth": float,
    "max_depth": float,
    "workers": int,
}
CALIB_KEYS = {"fx": float, "baseline": float}


def parse_kv(text: str, keys: dict, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in keys:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            out[key] = keys[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def load_kv(path, keys: dict) -> dict:
    return parse_kv(Path(path).read_text(encoding="utf-8"), keys, str(path))


def load_calib(path) -> StereoCalib:
    values = load_kv(path, CALIB_KEYS)
    missing = set(CALIB_KEYS) - set(values)
    if missing:
        raise ConfigError(f"{path}: missing calibration keys {sorted(missing)}")
    return StereoCalib(values["fx"], values["baseline"])


@dataclass
class RunConfig:
    dataset_dir: Path = Path(".")
    output_dir: Path = Path("out")
    calib: Path | None = None
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    strip: SearchStrip = field(default_factory=SearchStrip)
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    workers: int = 1

    @property
    def arith_mode(self) -> ArithMode:
        return self.extractor.arith_mode

    @classmethod
    def from_values(cls, values: dict) -> RunConfig:
        v = {k: val for k, val in values.items() if val is not None}
        unknown = set(v) - set(RUN_KEYS)
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        ext = ExtractorConfig(
            fast_threshold=v.get("fast_threshold", 20),
            max_features_per_level=v.get("max_features_per_level", 600),
            arith_mode=ArithMode(v.get("arith_mode", "float")),
            scale_factor=v.get("scale_factor", 1.2),
        )
        strip = SearchStrip(
            v.get("row_tolerance", 2), v.get("min_disparity", 1), v.get("max_disparity", 96)
        )
        matcher = MatcherConfig(
            v.get("max_hamming", 64),
            v.get("slide", 5),
            (v.get("min_depth", DEPTH_RANGE[0]), v.get("max_depth", DEPTH_RANGE[1])),
        )
        dataset = Path(v.get("dataset_dir", "."))
        calib = v.get("calib")
        if calib is None and (dataset / "calib.txt").is_file():
            calib = dataset / "calib.txt"
        return cls(
            dataset,
            Path(v.get("output_dir", "out")),
            Path(calib) if calib is not None else None,
            ext,
            strip,
            matcher,
            max(1, v.get("workers", 1)),
        )
