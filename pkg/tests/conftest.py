import json
from pathlib import Path

import pytest

DATA = Path(__file__).with_name("data")
_CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False, help="run the long quantitative reproductions")


def pytest_configure(config):
    config.addinivalue_line("markers", "extended: long-running reproduction, needs --extended")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="needs --extended")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def expected():
    return json.loads((DATA / "expected.json").read_text())


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str = ""):
        _CRITERIA[number] = (bool(ok), detail)
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 13):
        if k in _CRITERIA:
            ok, detail = _CRITERIA[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: SKIP  (not run; 9 and 10 need --extended)")
