from __future__ import annotations

import numpy as np
import pytest

from mcci import load_darwin, load_lizard, load_sleep
from mcci.shift_models import OneSampleData, TwoSampleData

FIG1 = [5, 6, 7, 8, 9, 0, 1, 2, 3, 4]


@pytest.fixture
def darwin() -> OneSampleData:
    return load_darwin()


@pytest.fixture
def sleep() -> TwoSampleData:
    return load_sleep()


@pytest.fixture
def lizard() -> TwoSampleData:
    return load_lizard()


@pytest.fixture
def fig1() -> TwoSampleData:
    """Two well separated groups: treated 5..9, control 0..4."""
    return TwoSampleData(np.array(FIG1, dtype=float), 5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


# one line per acceptance criterion, shown at the end of the run
ACCEPTANCE_LINES: list = []


@pytest.fixture
def report():
    """Record a criterion's PASS/FAIL line, then fail the test if it did not pass."""

    def record(k: int, ok: bool, detail: str) -> None:
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
