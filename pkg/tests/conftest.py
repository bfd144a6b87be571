import logging

import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session", autouse=True)
def _quiet_stability_warnings():
    # the sufficient condition fails on nearly every table mesh; tests that check the
    # warning lower the level on the emitting logger through caplog.at_level
    logger = logging.getLogger("fracdqm")
    old = logger.level
    logger.setLevel(logging.ERROR)
    yield
    logger.setLevel(old)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA, key=lambda k: (len(k), k)):
        ok, detail = CRITERIA[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
