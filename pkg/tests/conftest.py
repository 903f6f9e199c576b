import importlib

import numpy as np
import pytest

from byzgossip import _pykernels


def _available_backends():
    out = [("python", _pykernels)]
    try:
        out.append(("cython", importlib.import_module("byzgossip._ckernels")))
    except ImportError:
        pass
    return out


BACKENDS = _available_backends()


@pytest.fixture(params=[b for b in BACKENDS], ids=[name for name, _ in BACKENDS])
def backend(request):
    """Each kernel implementation that is importable in this environment."""
    return request.param[1]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for name, mod in list(sys.modules.items()):
        if name.split(".")[-1] == "test_acceptance":
            lines = getattr(mod, "RESULTS", []) or lines
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
