"""Crank-Nicolson marching for the advection-dispersion equation with a
tempered-memory time derivative.

At every half-point t_{n+1/2} the scheme balances the averaged spatial
operators against the time derivative plus the fast-evaluated memory term,
yielding one constant-band tridiagonal system per step, solved by Thomas
elimination. A reference marcher that replaces the compressed history with
exact-kernel quadrature shares the same assembly, so trajectory differences
between the two isolate the kernel-compression error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .derivative import (
    HistoryState,
    TemperedParams,
    _direct_history_coeffs,
    advance_history,
    new_history_state,
)
from .errors import (
    DimensionMismatchError,
    DomainError,
    InvalidParameterError,
    LevelOrderError,
    SolverBreakdownError,
)
from .meshes import SpatialGrid, TemporalMesh, check_step_condition
from .soe import SoeApproximation, build_soe

__all__ = [
    "ProblemSpec",
    "TridiagonalSystem",
    "Solution",
    "assemble_step",
    "thomas_solve",
    "step",
    "solve",
    "eigenvalue_check",
    "render_solution_csv",
    "write_solution_csv",
    "write_solution_binary",
    "read_solution_binary",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data: unit advection and dispersion, zero boundary values.

    ``initial_condition`` and ``forcing`` must accept numpy arrays of
    spatial nodes (forcing additionally a scalar time) and return arrays of
    the same shape.
    """

    domain_length: float
    t_final: float
    alpha: float
    lam: float
    initial_condition: Callable[[np.ndarray], np.ndarray]
    forcing: Callable[[np.ndarray, float], np.ndarray]

    def __post_init__(self) -> None:
        if not self.domain_length > 0:
            raise InvalidParameterError(
                f"domain_length must be positive, got {self.domain_length}"
            )
        if not self.t_final > 0:
            raise InvalidParameterError(
                f"t_final must be positive, got {self.t_final}"
            )
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(
                f"alpha must lie in (0, 1), got {self.alpha}"
            )
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")
        if not callable(self.initial_condition) or not callable(self.forcing):
            raise InvalidParameterError(
                "initial_condition and forcing must be callables"
            )


@dataclass(frozen=True)
class TridiagonalSystem:
    """One step's linear system: sub/diag/sup bands and right-hand side."""

    sub: np.ndarray = field(repr=False)
    diag: np.ndarray = field(repr=False)
    sup: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Solution:
    """Full trajectory: levels[n, i] = U at time node n, space node i."""

    mesh: TemporalMesh
    grid: SpatialGrid
    levels: np.ndarray = field(repr=False)


def eigenvalue_check(eta: float, h: float, m: int) -> np.ndarray:
    """Eigenvalues of the step matrix: eta + (1 + sqrt(1 - h^2/4) cos(k pi/m))/h^2.

    All of them are >= eta > 0 when h < 2, which is what makes every step
    uniquely solvable.

    Raises
    ------
    DomainError
        If h >= 2 (the square-root argument turns negative).
    """
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    arg = 1.0 - h * h / 4.0
    if arg < 0:
        raise DomainError(
            f"spacing h={h} >= 2 leaves the real eigenvalue regime"
        )
    k = np.arange(1, m)
    return eta + (1.0 + math.sqrt(arg) * np.cos(k * np.pi / m)) / (h * h)


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Solve the tridiagonal system by forward elimination/back substitution.

    Raises
    ------
    DimensionMismatchError
        If band lengths are inconsistent.
    SolverBreakdownError
        On a negligible pivot, or if the verified residual exceeds
        1e-12 * (1 + max|rhs|).
    """
    diag = np.ascontiguousarray(system.diag, dtype=np.float64)
    sub = np.ascontiguousarray(system.sub, dtype=np.float64)
    sup = np.ascontiguousarray(system.sup, dtype=np.float64)
    rhs = np.ascontiguousarray(system.rhs, dtype=np.float64)
    m = len(diag)
    if m < 1 or len(rhs) != m or len(sub) != m - 1 or len(sup) != m - 1:
        raise DimensionMismatchError(
            f"inconsistent band lengths: diag {len(diag)}, sub {len(sub)}, "
            f"sup {len(sup)}, rhs {len(rhs)}"
        )
    # The core expects length-m band buffers even though only m-1 entries
    # participate; pad with a trailing zero.
    sub_p = np.zeros(m, dtype=np.float64)
    sup_p = np.zeros(m, dtype=np.float64)
    if m > 1:
        sub_p[: m - 1] = sub
        sup_p[: m - 1] = sup
    x, min_pivot = _kernels.thomas_solve_core(sub_p, diag, sup_p, rhs)
    scale = float(np.max(np.abs(diag)))
    if min_pivot < 1e-14 * scale:
        raise SolverBreakdownError(
            f"tridiagonal pivot {min_pivot:g} below 1e-14 of the "
            f"diagonal scale {scale:g}"
        )
    residual = diag * x - rhs
    if m > 1:
        residual[1:] += sub * x[:-1]
        residual[:-1] += sup * x[1:]
    res_norm = float(np.max(np.abs(residual)))
    if res_norm > 1e-12 * (1.0 + float(np.max(np.abs(rhs)))):
        raise SolverBreakdownError(
            f"tridiagonal residual {res_norm:g} exceeds the acceptance bound"
        )
    return x


def _band_values(
    spec: ProblemSpec, mesh: TemporalMesh, grid: SpatialGrid, n: int
) -> tuple[float, float, float, float, float]:
    """Shared per-step constants: (c_loc, diag, sub, sup, gamma_fac)."""
    alpha = spec.alpha
    tau = mesh.steps[n]
    tp = 0.5 * tau
    h = grid.spacing
    c_loc = 1.0 / (2.0 * math.gamma(2.0 - alpha) * tp**alpha)
    diag = 1.0 / tau + c_loc + 1.0 / (h * h)
    sub = -1.0 / (2.0 * h * h) - 1.0 / (4.0 * h)
    sup = -1.0 / (2.0 * h * h) + 1.0 / (4.0 * h)
    gamma_fac = 1.0 / math.gamma(1.0 - alpha)
    return c_loc, diag, sub, sup, gamma_fac


def _assemble(
    spec: ProblemSpec,
    mesh: TemporalMesh,
    grid: SpatialGrid,
    history_term: np.ndarray,
    u_level: np.ndarray,
    u_initial: np.ndarray,
    n: int,
) -> TridiagonalSystem:
    """Build the step system given the evaluated history column.

    ``history_term`` is the weighted history sum (the compressed
    accumulator reduction on the fast path, exact-kernel quadrature on the
    reference path) at the interior nodes; ``u_level``/``u_initial`` are
    full rows including boundary zeros.
    """
    alpha = spec.alpha
    lam = spec.lam
    tau = mesh.steps[n]
    tp = 0.5 * tau
    t_half = mesh.half_points[n]
    h = grid.spacing
    m = grid.n_cells
    c_loc, diag_val, sub_val, sup_val, gamma_fac = _band_values(
        spec, mesh, grid, n
    )

    u_int = u_level[1:-1]
    coef_level = 1.0 / tau - c_loc + 2.0 * alpha * c_loc * math.exp(-lam * tp)
    lap = (u_level[2:] - 2.0 * u_int + u_level[:-2]) / (h * h)
    adv = (u_level[2:] - u_level[:-2]) / (2.0 * h)
    boundary0 = gamma_fac * math.exp(-lam * t_half) / t_half**alpha
    x_int = grid.nodes[1:-1]
    f_vals = np.asarray(spec.forcing(x_int, t_half), dtype=np.float64)
    if f_vals.shape != x_int.shape:
        raise DimensionMismatchError(
            f"forcing returned shape {f_vals.shape}, expected {x_int.shape}"
        )
    rhs = (
        coef_level * u_int
        + gamma_fac * history_term
        + boundary0 * u_initial[1:-1]
        + 0.5 * lap
        - 0.5 * adv
        + f_vals
    )
    return TridiagonalSystem(
        sub=np.full(m - 2, sub_val),
        diag=np.full(m - 1, diag_val),
        sup=np.full(m - 2, sup_val),
        rhs=rhs,
    )


def assemble_step(
    spec: ProblemSpec,
    mesh: TemporalMesh,
    grid: SpatialGrid,
    soe: SoeApproximation,
    states: HistoryState,
    levels: np.ndarray,
    n: int,
) -> TridiagonalSystem:
    """Assemble the step-n system with the fast (compressed) history.

    ``states`` holds the per-node accumulators advanced to level n (columns
    are interior nodes); ``levels`` contains rows U^0..U^n at least.
    """
    levels = np.asarray(levels, dtype=np.float64)
    if levels.ndim != 2 or levels.shape[1] != grid.n_cells + 1:
        raise DimensionMismatchError(
            f"levels must be (>=n+1, {grid.n_cells + 1}), got {levels.shape}"
        )
    if levels.shape[0] < n + 1:
        raise DimensionMismatchError(
            f"levels must contain rows 0..{n}, got {levels.shape[0]} rows"
        )
    if states.width != grid.n_cells - 1:
        raise DimensionMismatchError(
            f"history width {states.width} != interior size {grid.n_cells - 1}"
        )
    if states.level != n:
        raise LevelOrderError(
            f"history state sits at level {states.level}, expected {n}"
        )
    history_term = spec.alpha * _kernels.history_reduce(
        np.asarray(soe.weights), states.values
    )
    return _assemble(spec, mesh, grid, history_term, levels[n], levels[0], n)


def step(
    spec: ProblemSpec,
    mesh: TemporalMesh,
    grid: SpatialGrid,
    soe: SoeApproximation,
    states: HistoryState,
    levels: np.ndarray,
    n: int,
) -> np.ndarray:
    """Compute the full next row U^{n+1} (boundary zeros included)."""
    system = assemble_step(spec, mesh, grid, soe, states, levels, n)
    row = np.zeros(grid.n_cells + 1, dtype=np.float64)
    row[1:-1] = thomas_solve(system)
    return row


def solve(
    spec: ProblemSpec,
    mesh: TemporalMesh,
    grid: SpatialGrid,
    epsilon: float = 1e-10,
    history: str = "fast",
    soe: SoeApproximation | None = None,
) -> Solution:
    """March the scheme over the whole mesh.

    Parameters
    ----------
    epsilon : float
        Kernel-compression tolerance for the fast history (ignored by the
        reference path).
    history : str
        "fast" for the compressed-history production path, "direct" for the
        exact-kernel reference marcher (quadratic cost, used to validate the
        fast path).
    soe : SoeApproximation, optional
        Prebuilt kernel compression to reuse across solves; must cover
        [min(tau_1, tau_2/2), t_final]. Built on demand when omitted.

    Raises
    ------
    InvalidParameterError
        For inconsistent domains or a grid too coarse for the eigenvalue
        regime (h >= 2).
    """
    if history not in {"fast", "direct"}:
        raise InvalidParameterError(
            f"history must be 'fast' or 'direct', got {history!r}"
        )
    if not math.isclose(mesh.t_final, spec.t_final, rel_tol=1e-12):
        raise InvalidParameterError(
            f"mesh t_final {mesh.t_final} != problem t_final {spec.t_final}"
        )
    if not math.isclose(grid.length, spec.domain_length, rel_tol=1e-12):
        raise InvalidParameterError(
            f"grid length {grid.length} != domain length {spec.domain_length}"
        )
    if grid.spacing >= 2.0:
        raise InvalidParameterError(
            f"spacing h={grid.spacing} >= 2 leaves the solvable eigenvalue "
            "regime; refine the grid"
        )

    condition = check_step_condition(mesh, spec.alpha)
    if not condition.all():
        worst = float(np.max((0.5 * mesh.steps) ** (2.0 - 2.0 * spec.alpha)))
        warnings.warn(
            f"{int((~condition).sum())} of {mesh.n_steps} steps violate the "
            f"step-size condition (worst value {worst:.3g} >= 1/3); "
            "the march continues but the stability bound is not guaranteed",
            UserWarning,
            stacklevel=2,
        )

    params = TemperedParams(alpha=spec.alpha, lam=spec.lam, mesh=mesh)
    n_steps = mesh.n_steps
    m_cells = grid.n_cells
    levels = np.zeros((n_steps + 1, m_cells + 1), dtype=np.float64)
    x_int = grid.nodes[1:-1]
    phi = np.asarray(spec.initial_condition(x_int), dtype=np.float64)
    if phi.shape != x_int.shape:
        raise DimensionMismatchError(
            f"initial_condition returned shape {phi.shape}, "
            f"expected {x_int.shape}"
        )
    levels[0, 1:-1] = phi

    state: HistoryState | None = None
    if history == "fast":
        if soe is None:
            delta_cut = min(mesh.steps[0], 0.5 * mesh.steps[1])
            soe = build_soe(spec.alpha, epsilon, delta_cut, mesh.t_final)
        state = new_history_state(soe, width=m_cells - 1)

    soe_weights = np.asarray(soe.weights) if soe is not None else None
    for n in range(n_steps):
        if history == "fast":
            history_term = spec.alpha * _kernels.history_reduce(
                soe_weights, state.values
            )
        elif n == 0:
            history_term = np.zeros(m_cells - 1, dtype=np.float64)
        else:
            a_coeff, b_coeff = _direct_history_coeffs(params, n)
            history_term = (
                a_coeff @ levels[:n, 1:-1] + b_coeff @ levels[1 : n + 1, 1:-1]
            )
        system = _assemble(
            spec, mesh, grid, history_term, levels[n], levels[0], n
        )
        levels[n + 1, 1:-1] = thomas_solve(system)
        if history == "fast" and n + 1 <= n_steps - 1:
            state = advance_history(
                state, params, levels[n, 1:-1], levels[n + 1, 1:-1]
            )

    return Solution(mesh=mesh, grid=grid, levels=levels)


def render_solution_csv(solution: Solution) -> str:
    """Serialize the trajectory as CSV rows ``x,t,u`` (space-major order)."""
    nodes_x = solution.grid.nodes
    nodes_t = solution.mesh.nodes
    lines = ["x,t,u"]
    for i, x in enumerate(nodes_x):
        for n, t in enumerate(nodes_t):
            lines.append(f"{x:.17g},{t:.17g},{solution.levels[n, i]:.17g}")
    return "\n".join(lines) + "\n"


def write_solution_csv(solution: Solution, path: str) -> None:
    """Write the trajectory as CSV rows ``x,t,u`` (space-major order)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_solution_csv(solution))


def write_solution_binary(solution: Solution, path: str) -> None:
    """Binary dump: float64 stream of (M+1, N+1) dims then U[i][n] row-major."""
    m_plus, n_plus = solution.grid.n_cells + 1, solution.mesh.n_steps + 1
    header = np.asarray([m_plus, n_plus], dtype=np.float64)
    body = np.ascontiguousarray(solution.levels.T, dtype=np.float64)
    with open(path, "wb") as fh:
        header.tofile(fh)
        body.tofile(fh)


def read_solution_binary(path: str) -> np.ndarray:
    """Read back a binary dump; returns levels with shape (N+1, M+1)."""
    raw = np.fromfile(path, dtype=np.float64)
    if len(raw) < 2:
        raise DimensionMismatchError(f"binary dump {path!r} too short")
    m_plus, n_plus = int(raw[0]), int(raw[1])
    if len(raw) != 2 + m_plus * n_plus:
        raise DimensionMismatchError(
            f"binary dump {path!r} length {len(raw)} does not match "
            f"dims ({m_plus}, {n_plus})"
        )
    return raw[2:].reshape(m_plus, n_plus).T.copy()
