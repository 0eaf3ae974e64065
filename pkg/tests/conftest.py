import numpy as np
import pytest

from qaes._backend import available

KERNELS = available()


@pytest.fixture(params=sorted(KERNELS))
def kernel(request):
    """Each importable kernel module in turn."""
    return KERNELS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def criterion(request, capsys):
    """Record one acceptance criterion: prints a PASS/FAIL line and asserts."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number, title, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
