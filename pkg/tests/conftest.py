"""Shared fixtures and the acceptance-criteria summary.

The corpus-level fixtures default to a generated stand-in carrying the
ArgKP release's exact global statistics; set ARGKP_CSV to point the
suite at a real release file instead.
"""

import os
from pathlib import Path

import pytest

from argkp_standin import build_argkp_standin

_ACCEPTANCE_LABELS: dict[str, str] = {}
_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture(scope="session")
def argkp_path(tmp_path_factory) -> Path:
    env = os.environ.get("ARGKP_CSV")
    if env:
        return Path(env)
    path = tmp_path_factory.mktemp("argkp") / "argkp.csv"
    return build_argkp_standin(path, seed=7)


@pytest.fixture(scope="session")
def argkp_dataset(argkp_path):
    from kpmatch.corpus import load_dataset

    return load_dataset(argkp_path)


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker and marker.args:
            _ACCEPTANCE_LABELS[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    if report.nodeid not in _ACCEPTANCE_LABELS:
        return
    if report.failed:
        _ACCEPTANCE_RESULTS[report.nodeid] = "FAIL"
    elif report.skipped:
        _ACCEPTANCE_RESULTS.setdefault(report.nodeid, "SKIP")
    elif report.when == "call" and report.passed:
        _ACCEPTANCE_RESULTS.setdefault(report.nodeid, "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    ran = {
        nodeid: outcome
        for nodeid, outcome in _ACCEPTANCE_RESULTS.items()
        if nodeid in _ACCEPTANCE_LABELS
    }
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, label in _ACCEPTANCE_LABELS.items():
        if nodeid in ran:
            terminalreporter.write_line(f"[{ran[nodeid]}] {label}")
