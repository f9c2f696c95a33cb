import pytest

_criteria: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the verdict of an acceptance criterion for the end-of-run report and assert it."""

    def record(label: str, passed: bool, detail: str = "") -> bool:
        _criteria[label] = (bool(passed), detail)
        assert passed, f"{label}: {detail}"
        return True

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, (passed, detail) in _criteria.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
