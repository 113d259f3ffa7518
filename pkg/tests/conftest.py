from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

_ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.outcome != "passed")
    if rep.when == "call" or failed:
        prev = _ACCEPTANCE.get(n, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else "PASS"
        _ACCEPTANCE[n] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[n]
        terminalreporter.write_line(f"[{status}] criterion {n}: {title}")
