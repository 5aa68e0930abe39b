"""Shared fixtures and the acceptance-summary terminal hook."""

from __future__ import annotations

import pytest

import tfde

# (test name, outcome) pairs collected from tests/test_acceptance.py runs.
_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def mesh_coarse() -> tfde.TemporalMesh:
    """Uniform ten-step mesh on [0, 2]; first step 0.2."""
    return tfde.graded_mesh(2.0, 10, 1.0)


@pytest.fixture(scope="session")
def soe_tight(mesh_coarse: tfde.TemporalMesh) -> tfde.SoeApproximation:
    """Tight-tolerance kernel compression covering the coarse mesh."""
    delta_cut = min(
        float(mesh_coarse.steps[0]), 0.5 * float(mesh_coarse.steps[1])
    )
    return tfde.build_soe(0.5, 1e-12, delta_cut, 2.0)


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    if report.when != "call":
        return
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS):
        label = name.removeprefix("test_").replace("_", " ")
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}: {status}")
