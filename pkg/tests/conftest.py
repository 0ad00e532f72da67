import numpy as np
import pytest

from ccmpc.config import load_example


@pytest.fixture(scope="session")
def example1():
    return load_example("example1")


@pytest.fixture(scope="session")
def example2():
    return load_example("example2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    def _report(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
