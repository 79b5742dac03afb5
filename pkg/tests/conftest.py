import pytest

_LINES = "acceptance_lines"


def pytest_configure(config):
    setattr(config, _LINES, {})


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    return getattr(request.config, _LINES)


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, _LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
