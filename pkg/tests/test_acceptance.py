"""Acceptance gate: one test per release criterion.

Each test is a single pass/fail criterion; the terminal summary appends one
line per criterion. Reference numbers are frozen expected values for the
pinned configurations, with the acceptance bands stated inline.
"""

from __future__ import annotations

import math

import numpy as np

import tfde

# Derivative refinement study, u(t) = t^1.5 on [0, 2], grading r = 1.5,
# lambda = 1, epsilon = 1e-12, N doubling 80 -> 640. Frozen expected
# worst-case half-point errors, plus the expected finest-row order.
_DERIVATIVE_REFERENCE: dict[float, tuple[list[float], float]] = {
    0.1: ([8.1838e-05, 2.1028e-05, 5.4093e-06, 1.3932e-06], 1.9570),
    0.3: ([5.8934e-04, 1.8795e-04, 5.9220e-05, 1.8528e-05], 1.6764),
    0.5: ([3.0071e-03, 1.0835e-03, 3.8718e-04, 1.3773e-04], 1.4910),
}

# Full-scheme refinement study, manufactured solution with delta = 1.8,
# grading r = 3, lambda = 1, M = N, N doubling 10 -> 160. Frozen expected
# worst-case L2 errors and the full observed-order sequences (measured
# against the final-step ratio).
_SOLUTION_REFERENCE: dict[float, tuple[list[float], list[float]]] = {
    0.1: (
        [1.3449e-03, 3.3323e-04, 8.3166e-05, 2.0814e-05, 5.2056e-06],
        [2.1736, 2.0783, 2.0353, 2.0177],
    ),
    0.3: (
        [1.3568e-03, 3.3372e-04, 8.4490e-05, 2.1233e-05, 5.3435e-06],
        [2.1688, 2.0724, 2.0292, 2.0087],
    ),
    0.5: (
        [1.3802e-03, 3.4626e-04, 8.7981e-05, 2.2555e-05, 5.8399e-06],
        [2.1542, 2.0515, 2.0000, 1.9672],
    ),
}


def test_criterion_1_derivative_error_table() -> None:
    """Errors within 20% of the frozen values, finest order within 0.15."""
    tables = tfde.power_derivative_sweep(
        alphas=list(_DERIVATIVE_REFERENCE),
        grading=1.5,
        delta_reg=1.5,
        n_values=[80, 160, 320, 640],
        epsilon=1e-12,
        t_final=2.0,
        lam=1.0,
    )
    for alpha, (errors, finest_order) in _DERIVATIVE_REFERENCE.items():
        rows = tables[alpha].rows
        assert [row[0] for row in rows] == [80, 160, 320, 640]
        for (n, err, _), expected in zip(rows, errors):
            assert abs(err - expected) <= 0.20 * expected, (
                f"alpha={alpha} N={n}: error {err:.4e} outside 20% of "
                f"{expected:.4e}"
            )
        order = rows[-1][2]
        assert order is not None
        assert abs(order - finest_order) <= 0.15, (
            f"alpha={alpha}: finest-row order {order:.4f} outside 0.15 of "
            f"{finest_order:.4f}"
        )


def test_criterion_2_solution_error_table() -> None:
    """L2 errors within 25%, every observed order within 0.15."""
    tables = tfde.manufactured_solution_sweep(
        alphas=list(_SOLUTION_REFERENCE),
        grading=3.0,
        delta_reg=1.8,
        n_values=[10, 20, 40, 80, 160],
        epsilon=1e-10,
        t_final=2.0,
        lam=1.0,
        domain_length=1.0,
    )
    for alpha, (errors, orders) in _SOLUTION_REFERENCE.items():
        rows = tables[alpha].rows
        assert [row[0] for row in rows] == [10, 20, 40, 80, 160]
        for (n, err, _), expected in zip(rows, errors):
            assert abs(err - expected) <= 0.25 * expected, (
                f"alpha={alpha} N={n}: error {err:.4e} outside 25% of "
                f"{expected:.4e}"
            )
        observed = [row[2] for row in rows[1:]]
        for n, got, expected in zip([20, 40, 80, 160], observed, orders):
            assert got is not None
            assert abs(got - expected) <= 0.15, (
                f"alpha={alpha} N={n}: order {got:.4f} outside 0.15 of "
                f"{expected:.4f}"
            )


def test_criterion_3_kernel_compression_conformance() -> None:
    """Dense-sampled kernel error stays at or below the requested epsilon."""
    mesh = tfde.graded_mesh(2.0, 10, 1.0)
    delta_cut = min(float(mesh.steps[0]), 0.5 * float(mesh.steps[1]))
    for alpha in (0.1, 0.5, 0.9):
        for epsilon in (1e-6, 1e-9, 1e-12):
            soe = tfde.build_soe(alpha, epsilon, delta_cut, mesh.t_final)
            error = tfde.verify_soe(soe)
            assert error <= epsilon, (
                f"alpha={alpha} epsilon={epsilon:.0e}: verified error "
                f"{error:.3e} exceeds the tolerance"
            )


def test_criterion_4_fast_direct_equivalence() -> None:
    """Compressed history matches exact-kernel history on both levels:
    full solver trajectories and standalone derivative evaluators."""
    epsilon = 1e-9
    t_final = 2.0

    # Solver level: same assembly, two history engines.
    alpha, lam, delta_reg = 0.4, 1.0, 1.8
    case = tfde.ManufacturedCase(alpha=alpha, lam=lam, delta_reg=delta_reg)
    spec = tfde.ProblemSpec(
        domain_length=1.0,
        t_final=t_final,
        alpha=alpha,
        lam=lam,
        initial_condition=tfde.manufactured_initial,
        forcing=lambda x, t: tfde.manufactured_forcing(case, x, t),
    )
    mesh = tfde.graded_mesh(t_final, 48, 2.0)
    grid = tfde.uniform_grid(1.0, 24)
    fast = tfde.solve(spec, mesh, grid, epsilon=epsilon, history="fast")
    direct = tfde.solve(spec, mesh, grid, history="direct")
    gap = float(np.max(np.abs(fast.levels - direct.levels)))
    solver_bound = 10.0 * epsilon * math.exp(t_final)
    assert gap <= solver_bound, (
        f"solver trajectories differ by {gap:.3e} > {solver_bound:.3e}"
    )

    # Evaluator level: scalar march on power-function samples.
    eval_mesh = tfde.graded_mesh(t_final, 64, 1.5)
    u_nodes = eval_mesh.nodes**delta_reg
    delta_cut = min(float(eval_mesh.steps[0]), 0.5 * float(eval_mesh.steps[1]))
    for alpha_eval in (0.2, 0.7):
        soe = tfde.build_soe(alpha_eval, epsilon, delta_cut, t_final)
        params = tfde.TemperedParams(alpha=alpha_eval, lam=lam, mesh=eval_mesh)
        state = tfde.new_history_state(soe, width=1)
        bound = (
            10.0
            * epsilon
            * (1.0 + t_final ** (delta_reg + 1.0))
            / math.gamma(1.0 - alpha_eval)
        )
        for n in range(eval_mesh.n_steps):
            fast_val = tfde.fast_derivative(
                state, params, u_nodes[0], u_nodes[n], u_nodes[n + 1], n
            )
            direct_val = tfde.direct_l1_derivative(params, u_nodes[: n + 2], n)
            assert abs(fast_val - direct_val) <= bound, (
                f"alpha={alpha_eval} n={n}: evaluators differ by "
                f"{abs(fast_val - direct_val):.3e} > {bound:.3e}"
            )
            if n + 1 <= eval_mesh.n_steps - 1:
                state = tfde.advance_history(
                    state, params, u_nodes[n], u_nodes[n + 1]
                )


def test_criterion_5_stability_under_perturbation() -> None:
    """Random initial-data pairs never amplify in the discrete L2 norm."""
    report = tfde.run_stability_suite()
    assert len(report.ratios) + int(report.metadata["skipped"]) == 20
    for i, ratio in enumerate(report.ratios):
        assert ratio <= 1.0 + 1e-10, (
            f"trial {i}: growth ratio {ratio:.15g} exceeds 1 + 1e-10"
        )


def test_criterion_6_solvability_eigenvalues_and_residuals() -> None:
    """Random step configurations keep the spectrum above eta and the
    tridiagonal solve residual at round-off scale."""
    rng = np.random.default_rng(20260821)
    for _ in range(10):
        length = float(rng.uniform(0.5, 2.0))
        m = int(rng.integers(8, 41))
        alpha = float(rng.uniform(0.05, 0.95))
        tau = float(rng.uniform(1e-3, 0.5))
        h = length / m
        tp = 0.5 * tau
        c_loc = 1.0 / (2.0 * math.gamma(2.0 - alpha) * tp**alpha)
        eta = 1.0 / tau + c_loc
        eigenvalues = tfde.eigenvalue_check(eta, h, m)
        assert eigenvalues.min() >= eta > 0.0

        diag = np.full(m - 1, eta + 1.0 / h**2)
        sub = np.full(m - 2, -1.0 / (2.0 * h**2) - 1.0 / (4.0 * h))
        sup = np.full(m - 2, -1.0 / (2.0 * h**2) + 1.0 / (4.0 * h))
        rhs = rng.normal(size=m - 1)
        x = tfde.thomas_solve(
            tfde.TridiagonalSystem(sub=sub, diag=diag, sup=sup, rhs=rhs)
        )
        residual = diag * x - rhs
        residual[1:] += sub * x[:-1]
        residual[:-1] += sup * x[1:]
        rel = float(np.max(np.abs(residual))) / float(np.max(np.abs(rhs)))
        assert rel <= 1e-11


def test_criterion_7_untempered_reduction_closed_form() -> None:
    """With no tempering, both evaluators reproduce the closed-form
    derivative of u(t) = t at every half-point."""
    epsilon = 1e-10
    mesh = tfde.graded_mesh(2.0, 40, 1.5)
    u_nodes = mesh.nodes.copy()
    delta_cut = min(float(mesh.steps[0]), 0.5 * float(mesh.steps[1]))
    bound = 10.0 * epsilon + 1e-12
    for alpha in (0.2, 0.5, 0.8):
        soe = tfde.build_soe(alpha, epsilon, delta_cut, mesh.t_final)
        params = tfde.TemperedParams(alpha=alpha, lam=0.0, mesh=mesh)
        state = tfde.new_history_state(soe, width=1)
        for n in range(mesh.n_steps):
            closed = mesh.half_points[n] ** (1.0 - alpha) / math.gamma(
                2.0 - alpha
            )
            fast_val = tfde.fast_derivative(
                state, params, u_nodes[0], u_nodes[n], u_nodes[n + 1], n
            )
            direct_val = tfde.direct_l1_derivative(params, u_nodes[: n + 2], n)
            assert abs(fast_val - closed) <= bound, (
                f"alpha={alpha} n={n}: fast value off by "
                f"{abs(fast_val - closed):.3e}"
            )
            assert abs(direct_val - closed) <= bound, (
                f"alpha={alpha} n={n}: direct value off by "
                f"{abs(direct_val - closed):.3e}"
            )
            if n + 1 <= mesh.n_steps - 1:
                state = tfde.advance_history(
                    state, params, u_nodes[n], u_nodes[n + 1]
                )


def test_criterion_8_complexity_scaling() -> None:
    """Doubling N roughly doubles the fast-path cost and quadruples the
    exact-kernel reference cost (30% slack on the wall-time ratios)."""
    report = tfde.run_timing_sweep()
    assert [row[0] for row in report.rows] == [256, 512, 1024]
    for (n_c, fast_c, direct_c), (n_f, fast_f, direct_f) in zip(
        report.rows, report.rows[1:]
    ):
        fast_ratio = fast_f / fast_c
        direct_ratio = direct_f / direct_c
        assert 1.4 <= fast_ratio <= 2.6, (
            f"fast-path cost ratio {fast_ratio:.2f} for N {n_c}->{n_f} "
            "outside [1.4, 2.6]"
        )
        assert 2.8 <= direct_ratio <= 5.2, (
            f"direct-path cost ratio {direct_ratio:.2f} for N {n_c}->{n_f} "
            "outside [2.8, 5.2]"
        )
