"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

import pytest

from msrsec.galois import field_create
from msrsec.msrcode import zigzag_construct
from msrsec.secrecy import default_tower

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _RESULTS.get(num)
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        if prev is not None and prev[1] == "FAIL":
            verdict = "FAIL"
        _RESULTS[num] = (title, verdict)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        title, verdict = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {verdict}  {title}")


@pytest.fixture(scope="session")
def gf4():
    return field_create(2, 2)


@pytest.fixture(scope="session")
def code423():
    return zigzag_construct(2)


@pytest.fixture(scope="session")
def code534():
    return zigzag_construct(3)


@pytest.fixture(scope="session")
def tower423(code423):
    return default_tower(code423)


@pytest.fixture(scope="session")
def tower534(code534):
    return default_tower(code534)
