import pytest

from molcodec.source import ALPHABET_1, ALPHABET_2, EXAMPLE, build_cumulative


@pytest.fixture(scope="session")
def example_model():
    return build_cumulative(EXAMPLE)


@pytest.fixture(scope="session")
def model1():
    return build_cumulative(ALPHABET_1)


@pytest.fixture(scope="session")
def model2():
    return build_cumulative(ALPHABET_2)


# -- one summary line per acceptance criterion --------------------------------

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    number = getattr(item.function, "criterion", None)
    if number is None or report.when == "teardown":
        return
    if report.when == "call" or report.failed:
        title = (item.function.__doc__ or "").strip().splitlines()[0]
        _CRITERIA[number] = (report.passed, title, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, title, seconds = _CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {title} ({seconds:.1f} s)")
