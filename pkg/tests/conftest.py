import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Record the outcome of an acceptance criterion for the summary block."""

    def _record(name, ok, detail=""):
        ACCEPTANCE[name] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
