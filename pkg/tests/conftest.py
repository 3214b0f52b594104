import sys
from pathlib import Path

import pytest

from zeroerr.channel import binary_symmetric, noiseless, typewriter

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def noiseless2():
    return noiseless(2, "ab", "cd")


@pytest.fixture
def pentagon():
    return typewriter()


@pytest.fixture
def bsc():
    return binary_symmetric("1/4")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        title, ok, secs = results[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f} s)")
