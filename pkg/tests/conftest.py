import pytest

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        _CRITERIA.append((number, title, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    grouped = {}
    for number, title, status in _CRITERIA:
        grouped.setdefault((number, title), []).append(status)
    for (number, title), statuses in sorted(grouped.items()):
        status = "PASS" if all(s == "PASS" for s in statuses) else "FAIL"
        cases = f" [{statuses.count('PASS')}/{len(statuses)} cases]" if len(statuses) > 1 else ""
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}{cases}")
