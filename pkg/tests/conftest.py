import pytest

CRITERIA = {
    1: "threshold behaviour below the stability limit",
    2: "small-window step-size sweep",
    3: "worked example in exact arithmetic",
    4: "wide-window step-size overlay",
    5: "secondary and central peak predictions",
    6: "window-length sensitivity",
    7: "three-soliton frozen-coefficients violation",
    8: "cw closed forms and oracle",
    9: "oracle cross-validation",
    10: "invariant suite",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(crit, []).append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        if n not in _outcomes:
            status = "NOT RUN"
        else:
            status = "PASS" if all(_outcomes[n]) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} {CRITERIA[n]}: {status}")
