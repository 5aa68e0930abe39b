"""Experiment harness: tables, error metrics, renderers, thread plumbing."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

import tfde
from tfde.errors import ConfigError, InvalidParameterError


def test_observed_order_halving() -> None:
    assert tfde.observed_order(1e-2, 2.5e-3, 2.0) == pytest.approx(2.0, rel=1e-12)
    assert tfde.observed_order(8.0, 1.0, 2.0) == pytest.approx(3.0, rel=1e-12)


def _flat_solution(n_steps: int = 2, n_cells: int = 4) -> tfde.Solution:
    mesh = tfde.graded_mesh(1.0, n_steps, 1.0)
    grid = tfde.uniform_grid(1.0, n_cells)
    levels = np.zeros((n_steps + 1, n_cells + 1))
    return tfde.Solution(mesh=mesh, grid=grid, levels=levels)


def test_l2_error_constant_offset() -> None:
    solution = _flat_solution()
    err = tfde.l2_error(solution, lambda x, t: np.full_like(x, 2.0), 0)
    assert err == pytest.approx(math.sqrt(0.25 * 3 * 4.0), rel=1e-14)


def test_l2_error_hand_computed_row() -> None:
    solution = _flat_solution()
    solution.levels[1, 1:-1] = [0.1, 0.2, 0.3]
    err = tfde.l2_error(solution, lambda x, t: np.zeros_like(x), 1)
    assert err == pytest.approx(math.sqrt(0.25 * (0.01 + 0.04 + 0.09)), rel=1e-12)


def test_l2_error_validates_level() -> None:
    solution = _flat_solution()
    with pytest.raises(InvalidParameterError):
        tfde.l2_error(solution, lambda x, t: np.zeros_like(x), 3)
    with pytest.raises(InvalidParameterError):
        tfde.l2_error(solution, lambda x, t: np.zeros_like(x), -1)


def test_error_table_validation() -> None:
    tfde.ErrorTable(rows=((4, 0.0, None), (8, 0.0, None)))
    with pytest.raises(InvalidParameterError):
        tfde.ErrorTable(rows=((4, 1.0, 2.0),))
    with pytest.raises(InvalidParameterError):
        tfde.ErrorTable(rows=((4, -1.0, None),))
    with pytest.raises(InvalidParameterError):
        tfde.ErrorTable(rows=((0, 1.0, None),))


_GOLDEN_TABLE = tfde.ErrorTable(
    rows=((80, 1.234567e-3, None), (160, 3.2e-4, 1.9482)),
    metadata={"experiment": "unit", "alpha": 0.5},
)


def test_render_csv_golden() -> None:
    expected = "N,error,order\n80,1.234567e-03,\n160,3.200000e-04,1.9482\n"
    assert tfde.render_csv(_GOLDEN_TABLE) == expected


def test_render_markdown_golden() -> None:
    expected = (
        "| N | error | order |\n"
        "| --- | --- | --- |\n"
        "| 80 | 1.234567e-03 |  |\n"
        "| 160 | 3.200000e-04 | 1.9482 |\n"
    )
    assert tfde.render_markdown(_GOLDEN_TABLE) == expected


def test_render_jsonl_round_trip() -> None:
    lines = tfde.render_jsonl(_GOLDEN_TABLE).strip().split("\n")
    records = [json.loads(line) for line in lines]
    assert len(records) == 2
    assert records[0]["N"] == 80
    assert records[0]["order"] is None
    assert records[0]["experiment"] == "unit"
    assert records[1]["order"] == pytest.approx(1.9482)
    assert records[1]["alpha"] == 0.5


def test_power_sweep_small() -> None:
    tables = tfde.power_derivative_sweep(
        alphas=[0.5],
        grading=2.0,
        delta_reg=1.5,
        n_values=[8, 16],
        epsilon=1e-8,
    )
    assert set(tables) == {0.5}
    table = tables[0.5]
    assert [row[0] for row in table.rows] == [8, 16]
    assert all(row[1] > 0 for row in table.rows)
    assert table.rows[0][2] is None
    assert 0.5 < table.rows[1][2] < 3.0
    assert table.metadata["experiment"] == "power-derivative"
    assert table.metadata["grading"] == 2.0


def test_manufactured_sweep_small() -> None:
    tables = tfde.manufactured_solution_sweep(
        alphas=[0.3],
        grading=2.0,
        delta_reg=1.8,
        n_values=[4, 8],
        epsilon=1e-7,
    )
    table = tables[0.3]
    assert [row[0] for row in table.rows] == [4, 8]
    assert all(row[1] > 0 for row in table.rows)
    assert table.rows[0][2] is None
    assert table.rows[1][2] is not None
    assert table.metadata["m_coupling"] == "M=N"
    assert table.metadata["experiment"] == "manufactured-solution"


def test_sweeps_reject_non_doubling_sequences() -> None:
    with pytest.raises(InvalidParameterError):
        tfde.power_derivative_sweep(
            alphas=[0.5], grading=1.5, delta_reg=1.5,
            n_values=[10, 30], epsilon=1e-8,
        )
    with pytest.raises(InvalidParameterError):
        tfde.manufactured_solution_sweep(
            alphas=[0.5], grading=1.5, delta_reg=1.5,
            n_values=[], epsilon=1e-8,
        )


def test_thread_count_does_not_change_results(monkeypatch) -> None:
    kwargs = dict(
        alphas=[0.3, 0.5],
        grading=2.0,
        delta_reg=1.5,
        n_values=[8, 16],
        epsilon=1e-7,
    )
    serial = tfde.power_derivative_sweep(**kwargs, threads=1)
    monkeypatch.setenv("TFDE_THREADS", "2")
    threaded = tfde.power_derivative_sweep(**kwargs)
    assert set(serial) == set(threaded)
    for alpha in serial:
        assert serial[alpha].rows == threaded[alpha].rows


def test_thread_configuration_rejects_junk(monkeypatch) -> None:
    monkeypatch.setenv("TFDE_THREADS", "many")
    with pytest.raises(ConfigError):
        tfde.power_derivative_sweep(
            alphas=[0.5], grading=1.5, delta_reg=1.5,
            n_values=[8], epsilon=1e-7,
        )
    monkeypatch.delenv("TFDE_THREADS")
    with pytest.raises(InvalidParameterError):
        tfde.power_derivative_sweep(
            alphas=[0.5], grading=1.5, delta_reg=1.5,
            n_values=[8], epsilon=1e-7, threads=0,
        )


def test_stability_suite_small_run() -> None:
    report = tfde.run_stability_suite(
        n_steps=8, n_cells=8, trials=3, epsilon=1e-8
    )
    assert len(report.ratios) == 3
    assert report.max_ratio <= 1.0 + 1e-10
    assert report.metadata["seed"] == 42
    assert report.metadata["skipped"] == 0
    assert tfde.StabilityReport(ratios=()).max_ratio == 0.0


def test_stability_suite_validates_trials() -> None:
    with pytest.raises(InvalidParameterError):
        tfde.run_stability_suite(trials=0)


def test_timing_sweep_smoke() -> None:
    report = tfde.run_timing_sweep(n_values=(4, 8), repeats=1, epsilon=1e-6)
    assert [row[0] for row in report.rows] == [4, 8]
    for _, fast_s, direct_s in report.rows:
        assert fast_s > 0.0
        assert direct_s > 0.0
    assert report.metadata["experiment"] == "timing"
    assert report.metadata["backend"] in ("numpy", "cython")
    with pytest.raises(InvalidParameterError):
        tfde.run_timing_sweep(n_values=(4, 8), repeats=0)


def test_stability_and_timing_renderers() -> None:
    report = tfde.StabilityReport(ratios=(0.5, 1.0))
    assert tfde.render_stability_csv(report) == "trial,ratio\n0,0.5\n1,1\n"
    timing = tfde.TimingReport(rows=((4, 1.5e-3, 2.5e-2),))
    assert (
        tfde.render_timing_csv(timing)
        == "N,fast_seconds,direct_seconds\n4,1.500000e-03,2.500000e-02\n"
    )
