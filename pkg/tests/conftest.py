import re

import pytest

from dadsim.config import run_preset
from dadsim.sim import integrate

_ACCEPTANCE = {}


class _PresetCache:
    """Each benchmark preset is integrated at most once per session."""

    def __init__(self):
        self._runs = {}

    def __call__(self, name):
        if name not in self._runs:
            self._runs[name] = integrate(run_preset(name))
        return self._runs[name]


@pytest.fixture(scope="session")
def preset_run():
    return _PresetCache()


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.failed:
        _ACCEPTANCE[key] = "FAIL"
    elif report.when == "call" and report.passed:
        _ACCEPTANCE.setdefault(key, "PASS")
    elif report.skipped:
        _ACCEPTANCE.setdefault(key, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), verdict in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {num:2d} {verdict}: {title}")
