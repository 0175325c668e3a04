from __future__ import annotations

import pytest

from demobpr import fixture_path, parse_file


@pytest.fixture(scope="session")
def asis():
    return parse_file(fixture_path("barez-asis.demo"))


@pytest.fixture(scope="session")
def tobe():
    return parse_file(fixture_path("barez-tobe.demo"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
