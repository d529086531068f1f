"""Prints one PASS/FAIL line per acceptance criterion after the run."""
import pytest

_results: dict[str, bool] = {}


def record_criterion(label: str, passed: bool):
    _results[label] = passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in item.nodeid:
        label = item.function.__doc__ or item.name
        _results.setdefault(label.strip().splitlines()[0], report.passed)
        if not report.passed:
            _results[label.strip().splitlines()[0]] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for label in sorted(_results):
        status = "PASS" if _results[label] else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}")
