"""Acceptance bookkeeping: tests marked ``criterion(n)`` roll up into one
PASS/FAIL line per acceptance criterion in the terminal summary."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "weights",
    2: "densities",
    3: "symmetries",
    4: "rank matrix",
    5: "recursion operators",
    6: "hierarchy",
    7: "AL fixtures",
    8: "property suites",
    9: "negative controls",
}

_outcomes = defaultdict(dict)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): contributes to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    prev = _outcomes[n].get(item.nodeid, "passed")
    if rep.failed:
        _outcomes[n][item.nodeid] = "failed"
    elif rep.skipped and prev != "failed":
        _outcomes[n][item.nodeid] = "skipped"
    elif rep.when == "call" and prev != "failed":
        _outcomes[n][item.nodeid] = prev


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            terminalreporter.write_line(f"criterion {n} ({title}): NOT RUN")
            continue
        failed = sum(r == "failed" for r in results.values())
        skipped = sum(r == "skipped" for r in results.values())
        verdict = "FAIL" if failed or skipped else "PASS"
        terminalreporter.write_line(
            f"criterion {n} ({title}): {verdict} "
            f"({len(results) - failed - skipped}/{len(results)} checks passed)")
