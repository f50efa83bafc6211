import numpy as np
import pytest

_verdicts = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.stash[_verdicts] = []


@pytest.fixture
def verdict(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion and assert it."""
    def record(number, title, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
        request.config.stash[_verdicts].append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_verdicts, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(ln)
