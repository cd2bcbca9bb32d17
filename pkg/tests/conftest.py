"""Shared fixtures and the acceptance-criterion summary."""

from __future__ import annotations

import time
from collections import OrderedDict

import pytest

from eohsim.constants import HE3, HE4
from eohsim.qubit import build_qubit
from eohsim.stark import PotentialSpec, solve_bound_states

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    entry = _CRITERIA.setdefault(n, {"title": title, "passed": 0, "failed": [], "skipped": 0})
    if rep.when == "call" or rep.failed or (rep.when == "setup" and rep.skipped):
        if rep.failed:
            entry["failed"].append(item.name)
        elif rep.skipped:
            entry["skipped"] += 1
        elif rep.when == "call":
            entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        if e["failed"]:
            status = "FAIL"
        elif e["passed"]:
            status = "PASS"
        else:
            status = "SKIP"
        detail = f"  failing: {', '.join(e['failed'])}" if e["failed"] else ""
        tr.write_line(f"criterion {n:>2} {status}  {e['title']}{detail}")


@pytest.fixture(scope="session")
def he3_states():
    return solve_bound_states(PotentialSpec(HE3, 0.0), n_levels=4)


@pytest.fixture(scope="session")
def he3_qubit():
    return build_qubit(HE3)


@pytest.fixture(scope="session")
def he4_qubit():
    return build_qubit(HE4)


@pytest.fixture
def stopwatch():
    class _Watch:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.t0

    return _Watch
