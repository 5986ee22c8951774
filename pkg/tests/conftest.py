import pytest

from am4rre import parse, resolve

from helpers import FIXTURE_NAME, fixture_text

_acceptance: list[tuple[int, str, str]] = []


@pytest.fixture(scope="session")
def gdpr_text() -> str:
    return fixture_text(FIXTURE_NAME)


@pytest.fixture(scope="session")
def gdpr_model(gdpr_text):
    result = parse(gdpr_text, FIXTURE_NAME)
    assert result.ok, result.diagnostics
    model, diags = resolve(result.model)
    assert not diags
    return model


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _acceptance.append((number, title, status))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status in sorted(_acceptance):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
