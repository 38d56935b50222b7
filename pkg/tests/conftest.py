import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one ``PASS``/``FAIL`` line for the end-of-run acceptance summary."""

    def record(number, passed, message):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {message}"
        _VERDICTS.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS, key=lambda item: item[0]):
        terminalreporter.write_line(line)
