"""Shared pytest hooks: one summary line per acceptance criterion."""

from collections import OrderedDict

import pytest

_RESULTS: "OrderedDict[str, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _RESULTS.setdefault(mark.args[0], [])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _RESULTS.setdefault(mark.args[0], []).append((item.name, report.passed, report.skipped))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, runs in _RESULTS.items():
        if not runs:
            tr.write_line(f"[NOT RUN] {name}")
            continue
        failed = [test for test, ok, skipped in runs if not ok and not skipped]
        status = "PASS" if not failed else "FAIL"
        line = f"[{status}] {name} ({len(runs) - len(failed)}/{len(runs)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
