from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ed21", max_examples=40, deadline=None)
settings.load_profile("ed21")


def boost(v1: float, v2: float) -> np.ndarray:
    g = 1.0 / np.sqrt(1.0 - v1 * v1 - v2 * v2)
    return np.array([g, g * v1, g * v2])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


@pytest.fixture
def gate():
    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance gate")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
