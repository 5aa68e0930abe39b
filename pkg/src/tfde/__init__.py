"""Solver for the tempered time-fractional advection-dispersion equation.

The package provides:

* graded temporal meshes and uniform spatial grids (``meshes``),
* kernel compression of the power-law memory kernel into a short sum of
  decaying exponentials (``soe``),
* fast and exact-kernel evaluators of the tempered memory derivative at
  half-time points (``derivative``),
* quadrature oracles and a manufactured solution (``oracles``),
* the Crank-Nicolson marching scheme with Thomas elimination (``solver``),
* convergence/stability/timing experiments (``harness``), and
* the ``tfde`` command-line front end (``cli``).

Numerical kernels run on a compiled extension when it is available; set
``TFDE_BACKEND`` to ``numpy`` or ``cython`` to force a backend.
"""

from ._kernels import BACKEND as backend
from .derivative import (
    HistoryState,
    StepCoefficients,
    TemperedParams,
    advance_history,
    direct_l1_derivative,
    fast_derivative,
    history_coeffs,
    interp_weights,
    new_history_state,
    step_coefficients,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    DomainError,
    InvalidParameterError,
    LevelOrderError,
    SoeConstructionError,
    SolverBreakdownError,
    TfdeError,
    ToleranceNotMetError,
)
from .harness import (
    ErrorTable,
    StabilityReport,
    TimingReport,
    l2_error,
    manufactured_solution_sweep,
    observed_order,
    power_derivative_sweep,
    render_csv,
    render_jsonl,
    render_markdown,
    render_stability_csv,
    render_timing_csv,
    run_stability_suite,
    run_timing_sweep,
)
from .meshes import (
    SpatialGrid,
    TemporalMesh,
    check_step_condition,
    graded_mesh,
    uniform_grid,
)
from .oracles import (
    ManufacturedCase,
    PowerFunction,
    caputo_power_closed_form,
    exact_tempered_caputo_power,
    manufactured_forcing,
    manufactured_initial,
    manufactured_solution,
)
from .soe import (
    SoeApproximation,
    build_soe,
    eval_soe,
    read_soe_csv,
    verify_soe,
    write_soe_csv,
)
from .solver import (
    ProblemSpec,
    Solution,
    TridiagonalSystem,
    assemble_step,
    eigenvalue_check,
    read_solution_binary,
    render_solution_csv,
    solve,
    step,
    thomas_solve,
    write_solution_binary,
    write_solution_csv,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend",
    "TfdeError",
    "InvalidParameterError",
    "DomainError",
    "DimensionMismatchError",
    "ConfigError",
    "SoeConstructionError",
    "LevelOrderError",
    "SolverBreakdownError",
    "ToleranceNotMetError",
    "TemporalMesh",
    "SpatialGrid",
    "graded_mesh",
    "uniform_grid",
    "check_step_condition",
    "SoeApproximation",
    "build_soe",
    "eval_soe",
    "verify_soe",
    "write_soe_csv",
    "read_soe_csv",
    "TemperedParams",
    "HistoryState",
    "StepCoefficients",
    "new_history_state",
    "interp_weights",
    "history_coeffs",
    "step_coefficients",
    "advance_history",
    "fast_derivative",
    "direct_l1_derivative",
    "PowerFunction",
    "ManufacturedCase",
    "caputo_power_closed_form",
    "exact_tempered_caputo_power",
    "manufactured_solution",
    "manufactured_initial",
    "manufactured_forcing",
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
