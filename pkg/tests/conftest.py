"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_OUTCOMES = {}
_TITLES = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number = marker.args[0]
    _TITLES.setdefault(number, marker.args[1] if len(marker.args) > 1 else "")
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if rep.failed and not detail:
        detail = rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else "error"
    _OUTCOMES.setdefault(number, []).append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        checks = _OUTCOMES[number]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        tr.write_line(f"{verdict}  criterion {number}: {_TITLES[number]}")
        for name, ok, detail in checks:
            tr.write_line(f"        {'ok  ' if ok else 'FAIL'}  {name}: {detail}")
