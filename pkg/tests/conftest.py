from __future__ import annotations

import pathlib
import sys

import pytest

TESTS_DIR = pathlib.Path(__file__).parent
if str(TESTS_DIR) not in sys.path:
    sys.path.insert(0, str(TESTS_DIR))


@pytest.fixture(scope="session", autouse=True)
def _jit_warm():
    """Compile every kernel up front so timed tests measure steady state."""
    from quadshare import kernels

    kernels.warmup()
