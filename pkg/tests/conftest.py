"""Shared test setup: acceptance summary lines and hypothesis profile."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "fracid",
    derandomize=True,
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fracid")

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one pass/fail summary line per acceptance criterion.

    Tests call record() *before* asserting so the printed table stays
    honest for criteria that are expected to fail.
    """

    def record(criterion: str, ok: bool, detail: str) -> None:
        tag = "PASS" if ok else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{tag}] criterion {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
