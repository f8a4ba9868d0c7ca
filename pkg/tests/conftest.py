import numpy as np
import pytest

from orbfront import kernels
from orbfront.kernels import _KERNELS


def _available_backends():
    names = ["numpy"]
    try:
        kernels.get_backend("numba")
        names.insert(0, "numba")
    except ImportError:
        pass
    return names


BACKEND_NAMES = _available_backends()


@pytest.fixture(params=BACKEND_NAMES)
def backend(request, monkeypatch):
    """Route every kernel call through one backend for the duration of a test."""
    impl = kernels.get_backend(request.param)
    for name in _KERNELS:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
