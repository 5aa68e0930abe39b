"""Convergence, stability, and timing experiments over the solver stack.

Two refinement sweeps mirror the standard verification pair:

* a scalar sweep that differentiates u(t) = t^delta against the quadrature
  oracle and reports the maximum half-point error per mesh size, and
* a manufactured-solution sweep that marches the full scheme and reports
  the discrete L2 error at the worst time level.

Both emit ``ErrorTable`` values with observed orders; renderers serialize
them as CSV, markdown, or JSON lines. Randomized stability trials and a
wall-clock scaling sweep round out the suite.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .derivative import (
    TemperedParams,
    advance_history,
    direct_l1_derivative,
    fast_derivative,
    new_history_state,
)
from .errors import ConfigError, DimensionMismatchError, InvalidParameterError
from .meshes import graded_mesh, uniform_grid
from .oracles import (
    ManufacturedCase,
    exact_tempered_caputo_power,
    manufactured_forcing,
    manufactured_initial,
    manufactured_solution,
)
from .soe import build_soe
from .solver import ProblemSpec, Solution, solve

__all__ = [
    "ErrorTable",
    "StabilityReport",
    "TimingReport",
    "l2_error",
    "observed_order",
    "power_derivative_sweep",
    "manufactured_solution_sweep",
    "run_stability_suite",
    "run_timing_sweep",
    "render_csv",
    "render_markdown",
    "render_jsonl",
    "render_stability_csv",
    "render_timing_csv",
]


@dataclass(frozen=True)
class ErrorTable:
    """Refinement table: rows of (N, error, observed order or None).

    The first row never carries an order (there is nothing to compare
    against); metadata records the experiment configuration and is merged
    into every JSON-lines row.
    """

    rows: tuple[tuple[int, float, float | None], ...]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for i, (n, err, order) in enumerate(self.rows):
            if n < 1:
                raise InvalidParameterError(f"row {i}: N must be >= 1, got {n}")
            if err < 0:
                raise InvalidParameterError(
                    f"row {i}: error must be >= 0, got {err}"
                )
            if i == 0 and order is not None:
                raise InvalidParameterError(
                    "the first row cannot carry an observed order"
                )


@dataclass(frozen=True)
class StabilityReport:
    """Per-trial worst-case growth ratios max_n ||U^n - V^n|| / ||U^0 - V^0||."""

    ratios: tuple[float, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0


@dataclass(frozen=True)
class TimingReport:
    """Wall-clock rows (N, fast_seconds, direct_seconds), best of repeats."""

    rows: tuple[tuple[int, float, float], ...]
    metadata: Mapping[str, object] = field(default_factory=dict)


def observed_order(e_coarse: float, e_fine: float, ratio: float) -> float:
    """Convergence order log(e_coarse/e_fine) / log(ratio).

    ``ratio`` is the refinement factor of the quantity the order is
    measured against (mesh size count, or coarsest-to-finest step ratio).
    """
    return math.log(e_coarse / e_fine) / math.log(ratio)


def l2_error(
    solution: Solution,
    exact: Callable[[np.ndarray, float], np.ndarray],
    level: int,
) -> float:
    """Discrete L2 error sqrt(h * sum_i (exact - U)^2) over interior nodes.

    Boundary nodes are excluded; both the scheme and the admissible exact
    solutions vanish there.
    """
    n_levels = solution.levels.shape[0]
    if not 0 <= level < n_levels:
        raise InvalidParameterError(
            f"level must lie in [0, {n_levels - 1}], got {level}"
        )
    x_int = solution.grid.nodes[1:-1]
    t = solution.mesh.nodes[level]
    exact_vals = np.asarray(exact(x_int, t), dtype=np.float64)
    if exact_vals.shape != x_int.shape:
        raise DimensionMismatchError(
            f"exact solution returned shape {exact_vals.shape}, "
            f"expected {x_int.shape}"
        )
    diff = exact_vals - solution.levels[level, 1:-1]
    return math.sqrt(solution.grid.spacing * float(np.dot(diff, diff)))


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        count = int(threads)
        if count < 1:
            raise InvalidParameterError(f"threads must be >= 1, got {threads}")
        return count
    raw = os.environ.get("TFDE_THREADS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(
            f"TFDE_THREADS must be a positive integer, got {raw!r}"
        ) from None
    if count < 1:
        raise ConfigError(f"TFDE_THREADS must be a positive integer, got {raw!r}")
    return count


def _check_doubling(n_values: Sequence[int], label: str) -> tuple[int, ...]:
    values = tuple(int(n) for n in n_values)
    if not values:
        raise InvalidParameterError(f"{label} must be non-empty")
    for a, b in zip(values, values[1:]):
        if b != 2 * a:
            raise InvalidParameterError(
                f"{label} must double at each refinement, got {a} then {b}"
            )
    return values


def _run_cells(
    cell: Callable[..., object],
    keys: Sequence[tuple],
    threads: int,
) -> dict[tuple, object]:
    if threads == 1 or len(keys) <= 1:
        return {key: cell(*key) for key in keys}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {key: pool.submit(cell, *key) for key in keys}
        return {key: futures[key].result() for key in keys}


def _power_cell(
    alpha: float,
    n_steps: int,
    grading: float,
    delta_reg: float,
    epsilon: float,
    t_final: float,
    lam: float,
) -> float:
    """Max |exact - fast| over all half-points for u(t) = t^delta_reg."""
    mesh = graded_mesh(t_final, n_steps, grading)
    delta_cut = min(mesh.steps[0], 0.5 * mesh.steps[1])
    soe = build_soe(alpha, epsilon, delta_cut, t_final)
    params = TemperedParams(alpha=alpha, lam=lam, mesh=mesh)
    u_nodes = mesh.nodes**delta_reg
    state = new_history_state(soe, width=1)
    worst = 0.0
    for n in range(n_steps):
        approx = fast_derivative(
            state, params, u_nodes[0], u_nodes[n], u_nodes[n + 1], n
        )
        exact = exact_tempered_caputo_power(
            delta_reg, alpha, lam, mesh.half_points[n]
        )
        worst = max(worst, abs(approx - exact))
        if n + 1 <= n_steps - 1:
            state = advance_history(state, params, u_nodes[n], u_nodes[n + 1])
    return worst


def power_derivative_sweep(
    alphas: Iterable[float],
    grading: float,
    delta_reg: float,
    n_values: Sequence[int],
    epsilon: float,
    t_final: float = 2.0,
    lam: float = 1.0,
    threads: int | None = None,
) -> dict[float, ErrorTable]:
    """Derivative-accuracy refinement study for u(t) = t^delta_reg.

    For each alpha and mesh size the fast evaluator marches the scalar
    samples and the worst absolute deviation from the quadrature oracle at
    the half-points is recorded. Orders compare consecutive (doubling)
    rows: log2(E(N) / E(2N)).
    """
    ns = _check_doubling(n_values, "n_values")
    alpha_list = sorted(set(float(a) for a in alphas))
    thread_count = _resolve_threads(threads)
    keys = [
        (alpha, n, grading, delta_reg, epsilon, t_final, lam)
        for alpha in alpha_list
        for n in ns
    ]
    results = _run_cells(_power_cell, keys, thread_count)

    tables: dict[float, ErrorTable] = {}
    for alpha in alpha_list:
        rows: list[tuple[int, float, float | None]] = []
        prev: float | None = None
        for n in ns:
            err = float(
                results[(alpha, n, grading, delta_reg, epsilon, t_final, lam)]
            )
            order = None
            if prev is not None and prev > 0 and err > 0:
                order = observed_order(prev, err, 2.0)
            rows.append((n, err, order))
            prev = err
        tables[alpha] = ErrorTable(
            rows=tuple(rows),
            metadata={
                "experiment": "power-derivative",
                "alpha": alpha,
                "lam": lam,
                "delta_reg": delta_reg,
                "grading": grading,
                "epsilon": epsilon,
                "t_final": t_final,
            },
        )
    return tables


def _manufactured_cell(
    alpha: float,
    n_steps: int,
    grading: float,
    delta_reg: float,
    epsilon: float,
    t_final: float,
    lam: float,
    domain_length: float,
) -> tuple[float, float]:
    """(max L2 error over levels 1..N, final step size) with M = N."""
    case = ManufacturedCase(alpha=alpha, lam=lam, delta_reg=delta_reg)
    mesh = graded_mesh(t_final, n_steps, grading)
    grid = uniform_grid(domain_length, n_steps)
    spec = ProblemSpec(
        domain_length=domain_length,
        t_final=t_final,
        alpha=alpha,
        lam=lam,
        initial_condition=manufactured_initial,
        forcing=lambda x, t: manufactured_forcing(case, x, t),
    )
    solution = solve(spec, mesh, grid, epsilon=epsilon, history="fast")

    def exact(x: np.ndarray, t: float) -> np.ndarray:
        return manufactured_solution(case, x, t)

    worst = 0.0
    for level in range(1, n_steps + 1):
        worst = max(worst, l2_error(solution, exact, level))
    return worst, float(mesh.steps[-1])


def manufactured_solution_sweep(
    alphas: Iterable[float],
    grading: float,
    delta_reg: float,
    n_values: Sequence[int],
    epsilon: float,
    t_final: float = 2.0,
    lam: float = 1.0,
    domain_length: float = 1.0,
    threads: int | None = None,
) -> dict[float, ErrorTable]:
    """Full-scheme refinement study against the manufactured solution.

    Spatial and temporal resolutions are coupled as M = N. The error per
    row is the worst discrete L2 deviation over levels 1..N; level 0 is
    exact by construction and excluded. Orders are measured against the
    final (largest) step of each mesh: log(e(N)/e(2N)) / log(tau_N/tau_2N).
    """
    ns = _check_doubling(n_values, "n_values")
    alpha_list = sorted(set(float(a) for a in alphas))
    thread_count = _resolve_threads(threads)
    keys = [
        (alpha, n, grading, delta_reg, epsilon, t_final, lam, domain_length)
        for alpha in alpha_list
        for n in ns
    ]
    results = _run_cells(_manufactured_cell, keys, thread_count)

    tables: dict[float, ErrorTable] = {}
    for alpha in alpha_list:
        rows: list[tuple[int, float, float | None]] = []
        prev_err: float | None = None
        prev_tau: float | None = None
        for n in ns:
            err, tau_last = results[
                (alpha, n, grading, delta_reg, epsilon, t_final, lam, domain_length)
            ]
            order = None
            if prev_err is not None and prev_err > 0 and err > 0:
                order = observed_order(prev_err, err, prev_tau / tau_last)
            rows.append((n, float(err), order))
            prev_err, prev_tau = float(err), tau_last
        tables[alpha] = ErrorTable(
            rows=tuple(rows),
            metadata={
                "experiment": "manufactured-solution",
                "alpha": alpha,
                "lam": lam,
                "delta_reg": delta_reg,
                "grading": grading,
                "epsilon": epsilon,
                "t_final": t_final,
                "domain_length": domain_length,
                "m_coupling": "M=N",
            },
        )
    return tables


def run_stability_suite(
    alpha: float = 0.5,
    lam: float = 1.0,
    t_final: float = 2.0,
    domain_length: float = 1.0,
    n_steps: int = 64,
    n_cells: int = 32,
    grading: float = 3.0,
    trials: int = 20,
    seed: int = 42,
    epsilon: float = 1e-10,
) -> StabilityReport:
    """Randomized initial-data perturbation trials.

    Each trial solves the homogeneous problem from two random initial
    vectors and records max_n ||U^n - V^n||_L2 / ||U^0 - V^0||_L2. The
    scheme is unconditionally non-amplifying, so every ratio should stay
    at or below 1 up to round-off. Trials with identical initial data
    (zero denominator) are skipped.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    mesh = graded_mesh(t_final, n_steps, grading)
    grid = uniform_grid(domain_length, n_cells)
    delta_cut = min(mesh.steps[0], 0.5 * mesh.steps[1])
    soe = build_soe(alpha, epsilon, delta_cut, t_final)

    def zero_forcing(x: np.ndarray, t: float) -> np.ndarray:
        return np.zeros_like(x)

    h = grid.spacing
    rng = np.random.default_rng(seed)
    ratios: list[float] = []
    skipped = 0
    for _ in range(trials):
        u0 = rng.uniform(-1.0, 1.0, size=n_cells - 1)
        v0 = rng.uniform(-1.0, 1.0, size=n_cells - 1)
        diff0 = u0 - v0
        denom = math.sqrt(h * float(np.dot(diff0, diff0)))
        if denom == 0.0:
            skipped += 1
            continue
        solutions = []
        for values in (u0, v0):
            spec = ProblemSpec(
                domain_length=domain_length,
                t_final=t_final,
                alpha=alpha,
                lam=lam,
                initial_condition=lambda x, v=values: v,
                forcing=zero_forcing,
            )
            solutions.append(solve(spec, mesh, grid, epsilon=epsilon, soe=soe))
        diff = solutions[0].levels[:, 1:-1] - solutions[1].levels[:, 1:-1]
        norms = np.sqrt(h * np.einsum("ni,ni->n", diff, diff))
        ratios.append(float(np.max(norms)) / denom)

    return StabilityReport(
        ratios=tuple(ratios),
        metadata={
            "experiment": "stability",
            "alpha": alpha,
            "lam": lam,
            "t_final": t_final,
            "domain_length": domain_length,
            "n_steps": n_steps,
            "n_cells": n_cells,
            "grading": grading,
            "trials": trials,
            "seed": seed,
            "epsilon": epsilon,
            "skipped": skipped,
        },
    )


def run_timing_sweep(
    alpha: float = 0.5,
    lam: float = 1.0,
    delta_reg: float = 1.5,
    grading: float = 1.5,
    t_final: float = 2.0,
    n_values: Sequence[int] = (256, 512, 1024),
    repeats: int = 3,
    epsilon: float = 1e-10,
) -> TimingReport:
    """Wall-clock scaling of the two history evaluators on u(t) = t^delta_reg.

    For each N the compressed-history march (linear cost) and the
    exact-kernel evaluator (quadratic cost) process the same scalar
    samples; kernel compression happens outside the timed region. Each
    loop is timed ``repeats`` times and the minimum kept.
    """
    ns = _check_doubling(n_values, "n_values")
    if repeats < 1:
        raise InvalidParameterError(f"repeats must be >= 1, got {repeats}")

    # One kernel compression, built for the finest mesh, serves every N:
    # its validity window contains the coarser meshes' windows, and a fixed
    # term count keeps the fast path's cost exactly linear in N.
    finest = graded_mesh(t_final, ns[-1], grading)
    delta_cut = min(finest.steps[0], 0.5 * finest.steps[1])
    soe = build_soe(alpha, epsilon, delta_cut, t_final)

    rows: list[tuple[int, float, float]] = []
    for n_steps in ns:
        mesh = graded_mesh(t_final, n_steps, grading)
        params = TemperedParams(alpha=alpha, lam=lam, mesh=mesh)
        u_nodes = mesh.nodes**delta_reg

        def fast_pass() -> float:
            state = new_history_state(soe, width=1)
            acc = 0.0
            for n in range(n_steps):
                acc += fast_derivative(
                    state, params, u_nodes[0], u_nodes[n], u_nodes[n + 1], n
                )
                if n + 1 <= n_steps - 1:
                    state = advance_history(
                        state, params, u_nodes[n], u_nodes[n + 1]
                    )
            return acc

        def direct_pass() -> float:
            acc = 0.0
            for n in range(n_steps):
                acc += direct_l1_derivative(params, u_nodes[: n + 2], n)
            return acc

        fast_seconds = math.inf
        direct_seconds = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            fast_pass()
            fast_seconds = min(fast_seconds, time.perf_counter() - start)
            start = time.perf_counter()
            direct_pass()
            direct_seconds = min(direct_seconds, time.perf_counter() - start)
        rows.append((n_steps, fast_seconds, direct_seconds))

    return TimingReport(
        rows=tuple(rows),
        metadata={
            "experiment": "timing",
            "alpha": alpha,
            "lam": lam,
            "delta_reg": delta_reg,
            "grading": grading,
            "t_final": t_final,
            "repeats": repeats,
            "epsilon": epsilon,
            "backend": _kernels.BACKEND,
        },
    )


def render_csv(table: ErrorTable) -> str:
    """CSV with mandatory header ``N,error,order``; blank order when absent."""
    lines = ["N,error,order"]
    for n, err, order in table.rows:
        order_txt = f"{order:.4f}" if order is not None else ""
        lines.append(f"{n},{err:.6e},{order_txt}")
    return "\n".join(lines) + "\n"


def render_markdown(table: ErrorTable) -> str:
    """Markdown table mirroring the CSV layout."""
    lines = ["| N | error | order |", "| --- | --- | --- |"]
    for n, err, order in table.rows:
        order_txt = f"{order:.4f}" if order is not None else ""
        lines.append(f"| {n} | {err:.6e} | {order_txt} |")
    return "\n".join(lines) + "\n"


def render_jsonl(table: ErrorTable) -> str:
    """One JSON object per row with the full configuration merged in."""
    lines = []
    for n, err, order in table.rows:
        record = dict(table.metadata)
        record.update({"N": n, "error": err, "order": order})
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def render_stability_csv(report: StabilityReport) -> str:
    lines = ["trial,ratio"]
    for i, ratio in enumerate(report.ratios):
        lines.append(f"{i},{ratio:.17g}")
    return "\n".join(lines) + "\n"


def render_timing_csv(report: TimingReport) -> str:
    lines = ["N,fast_seconds,direct_seconds"]
    for n, fast_s, direct_s in report.rows:
        lines.append(f"{n},{fast_s:.6e},{direct_s:.6e}")
    return "\n".join(lines) + "\n"
