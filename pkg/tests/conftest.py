import numpy as np
import pytest

from pairbounds import BivariateSpec

EXAMPLE_P = [0.35, 0.19, 0.13, 0.2]
EXAMPLE_BIV = [(0, 1, 0.001), (0, 2, 0.022), (0, 3, 0.03), (1, 2, 0.017), (1, 3, 0.018), (2, 3, 0.019)]


@pytest.fixture
def example_p():
    return list(EXAMPLE_P)


@pytest.fixture
def example_biv():
    return BivariateSpec.general(4, EXAMPLE_BIV)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion and assert it."""

    def report(number: int, ok: bool, message: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {message}"
        request.config.acceptance_lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return report
