import pytest

_RESULTS = {}
_NOTES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        _RESULTS.setdefault(mark.args[0], (mark.args[1], "not run"))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        if report.skipped:
            status = "SKIP"
        _RESULTS[number] = (title, status)


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the current criterion's summary line."""
    mark = request.node.get_closest_marker("criterion")

    def record(text):
        _NOTES[mark.args[0]] = text
        print(f"criterion {mark.args[0]}: {text}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status = _RESULTS[number]
        extra = f" ({_NOTES[number]})" if number in _NOTES else ""
        terminalreporter.write_line(f"criterion {number:>2} {status}: {title}{extra}")
