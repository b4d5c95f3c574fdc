"""Shared fixtures and the acceptance-suite summary hook."""

import numpy as np
import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    _ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS.items()):
        mark = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"{mark:>6}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
