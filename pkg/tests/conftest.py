import pytest

# criterion number -> (passed, detail); filled in by test_acceptance.py
CRITERIA = {}


def record(number, passed, detail):
    CRITERIA[number] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def criterion():
    return record
