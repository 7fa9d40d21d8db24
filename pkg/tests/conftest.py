"""Shared pytest hooks.

Tests marked ``@pytest.mark.criterion(n, "title")`` are acceptance
criteria; a one-line PASS/FAIL verdict per criterion is printed in the
terminal summary. Tests may attach a short measurement string with
``record_property("detail", ...)``.
"""

import pytest

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = rep.failed or (rep.when == "setup" and rep.skipped)
    if rep.when == "call" or failed:
        detail = dict(item.user_properties).get("detail", "")
        prev = _VERDICTS.get(number)
        ok = not failed and (prev is None or prev[1])
        _VERDICTS[number] = (title, ok, detail if detail else (prev[2] if prev else ""))


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, ok, detail = _VERDICTS[number]
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
