import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome: use as `with criterion(n, text):`."""
    from contextlib import contextmanager

    @contextmanager
    def record(number, text):
        # a criterion passes only if every case recorded under it passes
        failed_before = ACCEPTANCE.get(number, ("PASS",))[0] == "FAIL"
        ACCEPTANCE[number] = ("FAIL", text)
        yield
        if not failed_before:
            ACCEPTANCE[number] = ("PASS", text)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {text}")
