import pytest

_REPORT: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(passed, detail)``."""
    name = request.node.name

    def record(passed: bool, detail: str) -> bool:
        _REPORT[name] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_REPORT):
        passed, detail = _REPORT[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
