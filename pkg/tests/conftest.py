import pytest

from dualize.catalog import load_fixture

# criterion number -> (title, passed); filled in by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def fx():
    return lambda name: load_fixture(name).payload


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2}: {'PASS' if ok else 'FAIL'}  {title}")
