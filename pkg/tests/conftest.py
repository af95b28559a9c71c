import pytest

# criterion number -> (title, passed, seconds, note)
RESULTS: dict = {}
REPORTS: list = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): an acceptance criterion with a time limit in seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title, limit = mark.args
    note = ""
    if rep.failed:
        note = str(rep.longrepr).strip().splitlines()[-1][:160]
    RESULTS[number] = (title, rep.passed, rep.duration, limit, note)


def pytest_terminal_summary(terminalreporter):
    if REPORTS:
        terminalreporter.section("bound measurement report")
        for line in REPORTS:
            terminalreporter.write_line(line)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, passed, secs, limit, note = RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number:2d}: {title} ({secs:.2f}s, limit {limit}s)"
        if note:
            line += f" -- {note}"
        terminalreporter.write_line(line)
