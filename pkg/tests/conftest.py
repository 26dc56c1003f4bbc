"""Shared fixtures and the acceptance-criteria reporter.

The reporter collects the outcome of every test whose name starts with
``test_criterion_`` and prints one PASS/FAIL line per criterion at the end
of the session, so the verdict survives in plain-text logs even when
individual test output is captured.
"""

import numpy as np
import pytest

from qtelescopy import StellarSource

_CRITERION_OUTCOMES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


@pytest.fixture
def source():
    """A generic source away from every fringe extremum."""
    return StellarSource(phi=0.7, g=0.8, epsilon=0.1)


@pytest.fixture
def unit_visibility_source():
    return StellarSource(phi=0.7, g=1.0, epsilon=0.1)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if name.startswith("test_criterion_"):
        _CRITERION_OUTCOMES[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERION_OUTCOMES):
        verdict = "PASS" if _CRITERION_OUTCOMES[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
