import os

import pytest

FULL_GRID = os.environ.get("REGRET_FORGE_FULL_GRID") == "1"

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion covered by this test")


def pytest_collection_modifyitems(config, items):
    skip = pytest.mark.skip(reason="long run; set REGRET_FORGE_FULL_GRID=1")
    for item in items:
        if "slow" in item.keywords and not FULL_GRID:
            item.add_marker(skip)


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _results.setdefault(number, {"title": title, "outcomes": []})
    if call.when == "setup" and call.excinfo is not None:
        skipped = call.excinfo.errisinstance(pytest.skip.Exception)
        entry["outcomes"].append("skip" if skipped else "fail")
    elif call.when == "call":
        if call.excinfo is None:
            entry["outcomes"].append("pass")
        else:
            entry["outcomes"].append("skip" if call.excinfo.errisinstance(pytest.skip.Exception) else "fail")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        outcomes = entry["outcomes"]
        if "fail" in outcomes:
            status = "FAIL"
        elif outcomes and all(o == "skip" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {entry['title']}")
