"""Hot inner loops, backed by numba unless ``ORBFRONT_DISABLE_NUMBA`` is set.

Both backends expose the same functions and return identical results; the
numpy one is the fallback when numba is unavailable or disabled.
"""
import importlib
import os

from ._tables import BORDER, CIRCLE_DX, CIRCLE_DY, FAST_ARC, MASK_DX, MASK_DY, PATCH_RADIUS, SAD_HALF

BACKENDS = ("numba", "numpy")

_KERNELS = (
    "fast_score_map",
    "nms_3x3",
    "patch_moments",
    "gaussian7",
    "descriptors",
    "hamming_matrix",
    "sad_profile",
)


def numba_disabled() -> bool:
    return os.environ.get("ORBFRONT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


def get_backend(name: str):
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    return importlib.import_module(f"{__name__}._{name}")


def _select():
    if not numba_disabled():
        try:
            return "numba", get_backend("numba")
        except ImportError:
            pass
    return "numpy", get_backend("numpy")


BACKEND, _impl = _select()

fast_score_map = _impl.fast_score_map
nms_3x3 = _impl.nms_3x3
patch_moments = _impl.patch_moments
gaussian7 = _impl.gaussian7
descriptors = _impl.descriptors
hamming_matrix = _impl.hamming_matrix
sad_profile = _impl.sad_profile

__all__ = [
    "BACKEND",
    "BACKENDS",
    "BORDER",
    "CIRCLE_DX",
    "CIRCLE_DY",
    "FAST_ARC",
    "MASK_DX",
    "MASK_DY",
    "PATCH_RADIUS",
    "SAD_HALF",
    "get_backend",
    "numba_disabled",
    *_KERNELS,
]
