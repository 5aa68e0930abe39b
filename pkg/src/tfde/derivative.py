"""Tempered-memory derivative evaluators at half-time levels.

The derivative with kernel (t-s)**(-alpha) and exponential tempering
exp(-lam*(t-s)) is split at each collocation point t_{n+1/2} into a local
part over [t_n, t_{n+1/2}] (closed form) and a history part over [0, t_n].
Two history evaluations live here:

- the fast path compresses the kernel with an exponential sum, reducing the
  history to per-exponent accumulators advanced by a one-step recurrence
  (O(n_exp) per step);
- the direct path integrates the exact kernel against the piecewise-linear
  interpolant subinterval by subinterval (O(n) per evaluation) and exists as
  the high-accuracy reference: fast minus direct is exactly the kernel
  compression error convolved with the interpolant.

Both use the same integrated-by-parts form, so the split is identical and
differences isolate the exponential-sum error alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    LevelOrderError,
)
from .meshes import TemporalMesh
from .soe import SoeApproximation, _legendre_rule

__all__ = [
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
]

# Below this value of (lam + s)*tau the closed forms for the interpolation
# weights lose most significant digits to cancellation; switch to the
# 4-term Taylor expansions (relative truncation < 1e-17 at the crossover).
_TAYLOR_CUT = 1e-4


@dataclass(frozen=True)
class TemperedParams:
    """Derivative parameters bound to a time mesh.

    Attributes
    ----------
    alpha : float
        Fractional order, in (0, 1).
    lam : float
        Tempering rate, >= 0; zero recovers the untempered derivative.
    mesh : TemporalMesh
    """

    alpha: float
    lam: float
    mesh: TemporalMesh

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(
                f"alpha must lie in (0, 1), got {self.alpha}"
            )
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class HistoryState:
    """Per-exponent history accumulators referenced to the next half-point.

    After advancing to level n, ``values[i]`` approximates
    Int_0^{t_n} exp(-(lam + s_i)(t_{n+1/2} - s)) * L1u(s) ds
    where L1u is the piecewise-linear interpolant of the accumulated samples.
    ``values`` has shape (n_exp, width): one column per independent series
    (spatial nodes advance together as columns).
    """

    soe: SoeApproximation
    level: int
    values: np.ndarray = field(repr=False)

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StepCoefficients:
    """Coefficient quartet for one exponent s_i, lag j, and level n."""

    lam1: float
    lam2: float
    a: float
    b: float


def new_history_state(soe: SoeApproximation, width: int = 1) -> HistoryState:
    """Fresh state at level 0 (empty history)."""
    if width < 1:
        raise InvalidParameterError(f"width must be >= 1, got {width}")
    return HistoryState(
        soe=soe, level=0, values=np.zeros((soe.n_exp, width), dtype=np.float64)
    )


def _interp_weight_vectors(
    mu: np.ndarray, tau_n: float, tau_np1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Interpolation weights for all exponents at one level.

    lam1 weights the newer sample u(t_n), lam2 the older u(t_{n-1}):
      lam1 = exp(-mu*tau_{n+1}/2) * (exp(-x) - 1 + x) / (mu**2 * tau_n)
      lam2 = exp(-mu*tau_{n+1}/2) * (1 - exp(-x) - x*exp(-x)) / (mu**2 * tau_n)
    with x = mu * tau_n, evaluated through series for tiny x.
    """
    mu = np.asarray(mu, dtype=np.float64)
    x = mu * tau_n
    small = x < _TAYLOR_CUT
    x_safe = np.where(small, 1.0, x)
    g1_closed = (np.expm1(-x_safe) + x_safe) / (x_safe * x_safe)
    g2_closed = (-np.expm1(-x_safe) - x_safe * np.exp(-x_safe)) / (x_safe * x_safe)
    g1_series = 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0
    g2_series = 0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0
    g1 = np.where(small, g1_series, g1_closed)
    g2 = np.where(small, g2_series, g2_closed)
    prefactor = np.exp(-0.5 * mu * tau_np1) * tau_n
    return prefactor * g1, prefactor * g2


def interp_weights(
    params: TemperedParams, exponent: float, level: int
) -> tuple[float, float]:
    """Interpolation weights (lam1, lam2) for one exponent at one level.

    ``lam1`` multiplies u(t_level), ``lam2`` multiplies u(t_{level-1}) in the
    history recurrence; both equal integrals of the positive factor
    exp(-(lam+s)(t_{level+1/2} - s)) against the linear basis on
    [t_{level-1}, t_level], so both are nonnegative.

    Raises
    ------
    InvalidParameterError
        If level is outside [1, N-1] or lam + exponent <= 0.
    """
    mesh = params.mesh
    if not 1 <= level <= mesh.n_steps - 1:
        raise InvalidParameterError(
            f"level must lie in [1, {mesh.n_steps - 1}], got {level}"
        )
    mu = params.lam + exponent
    if not mu > 0:
        raise InvalidParameterError(f"lam + exponent must be > 0, got {mu}")
    lam1, lam2 = _interp_weight_vectors(
        np.asarray([mu]), mesh.steps[level - 1], mesh.steps[level]
    )
    return float(lam1[0]), float(lam2[0])


def history_coeffs(
    params: TemperedParams, soe: SoeApproximation, j: int, n: int
) -> tuple[float, float]:
    """Lagged history coefficients (a_j_n, b_j_n).

    a = alpha * sum_i w_i * exp(-(lam+s_i)(t_{n+1/2} - t_{n-j+1/2})) * lam1_{i,n-j}
    and b likewise with lam2. These are the weights the compressed history
    places on u(t_{n-j}) and u(t_{n-j-1}).
    """
    mesh = params.mesh
    if n < 1 or n > mesh.n_steps - 1:
        raise InvalidParameterError(
            f"n must lie in [1, {mesh.n_steps - 1}], got {n}"
        )
    if not 0 <= j <= n - 1:
        raise InvalidParameterError(f"j must lie in [0, {n - 1}], got {j}")
    mu = params.lam + np.asarray(soe.exponents)
    level = n - j
    lag = mesh.half_points[n] - mesh.half_points[level]
    lam1, lam2 = _interp_weight_vectors(
        mu, mesh.steps[level - 1], mesh.steps[level]
    )
    shift = np.exp(-mu * lag)
    w = np.asarray(soe.weights)
    a = params.alpha * float(np.dot(w, shift * lam1))
    b = params.alpha * float(np.dot(w, shift * lam2))
    return a, b


def step_coefficients(
    params: TemperedParams, soe: SoeApproximation, index: int, j: int, n: int
) -> StepCoefficients:
    """Full coefficient record for exponent ``index``, lag j, level n."""
    lam1, lam2 = interp_weights(params, float(soe.exponents[index]), n - j)
    a, b = history_coeffs(params, soe, j, n)
    return StepCoefficients(lam1=lam1, lam2=lam2, a=a, b=b)


def _as_column(u, width: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if arr.ndim != 1 or len(arr) != width:
        raise DimensionMismatchError(
            f"{name} must be scalar or length {width}, got shape {arr.shape}"
        )
    return arr


def advance_history(
    state: HistoryState, params: TemperedParams, u_prev, u_curr
) -> HistoryState:
    """Advance the accumulators one level via the exponential recurrence.

    With n = state.level + 1:
      H_i <- exp(-(lam+s_i)(tau_n + tau_{n+1})/2) * H_i
             + lam1_{i,n} * u_curr + lam2_{i,n} * u_prev
    where u_curr = u(t_n) and u_prev = u(t_{n-1}).

    Returns a new state at level n; the input state is not modified.

    Raises
    ------
    LevelOrderError
        If advancing past level N-1 (the recurrence references the step
        after the new level, which would not exist).
    """
    mesh = params.mesh
    n = state.level + 1
    if n > mesh.n_steps - 1:
        raise LevelOrderError(
            f"cannot advance history to level {n}: the recurrence references "
            f"step {n + 1} of a {mesh.n_steps}-step mesh"
        )
    mu = params.lam + np.asarray(state.soe.exponents)
    tau_n = mesh.steps[n - 1]
    tau_np1 = mesh.steps[n]
    decay = np.exp(-0.5 * mu * (tau_n + tau_np1))
    lam1, lam2 = _interp_weight_vectors(mu, tau_n, tau_np1)
    width = state.width
    u_curr_arr = _as_column(u_curr, width, "u_curr")
    u_prev_arr = _as_column(u_prev, width, "u_prev")
    values = state.values.copy()
    _kernels.advance_history_inplace(
        values, decay, lam1, lam2, u_curr_arr, u_prev_arr
    )
    return HistoryState(soe=state.soe, level=n, values=values)


def fast_derivative(
    state: HistoryState, params: TemperedParams, u_0, u_n, u_np1, n: int
):
    """Fast evaluation of the tempered derivative at t_{n+1/2}.

    Combines the closed-form local term with the compressed history carried
    by ``state`` (which must sit at level n; at n = 0 the history is empty
    and the expression collapses to the local term alone):

      (1/Gamma(1-alpha)) * [ (u_n + u_np1) / (2(1-alpha)*tp**alpha)
        - alpha*exp(-lam*tp)/((1-alpha)*tp**alpha) * u_n
        - exp(-lam*t_half)/t_half**alpha * u_0
        - alpha * sum_i w_i * H_i ]

    with tp = tau_{n+1}/2. Scalar inputs give a float; length-``width``
    arrays give an array.
    """
    mesh = params.mesh
    if not 0 <= n <= mesh.n_steps - 1:
        raise InvalidParameterError(
            f"n must lie in [0, {mesh.n_steps - 1}], got {n}"
        )
    if state.level != n:
        raise LevelOrderError(
            f"history state sits at level {state.level}, expected {n}"
        )
    alpha = params.alpha
    lam = params.lam
    tp = 0.5 * mesh.steps[n]
    t_half = mesh.half_points[n]
    gamma_fac = 1.0 / math.gamma(1.0 - alpha)
    scalar = np.isscalar(u_n) or (np.asarray(u_n).ndim == 0)

    width = state.width
    u0_arr = _as_column(u_0, width, "u_0")
    un_arr = _as_column(u_n, width, "u_n")
    unp1_arr = _as_column(u_np1, width, "u_np1")

    local_sym = (un_arr + unp1_arr) / (2.0 * (1.0 - alpha) * tp**alpha)
    local_lag = (
        alpha * math.exp(-lam * tp) / ((1.0 - alpha) * tp**alpha)
    ) * un_arr
    boundary = (math.exp(-lam * t_half) / t_half**alpha) * u0_arr
    hist = alpha * _kernels.history_reduce(
        np.asarray(state.soe.weights), state.values
    )
    out = gamma_fac * (local_sym - local_lag - boundary - hist)
    return float(out[0]) if scalar and width == 1 else out


def _direct_history_coeffs(
    params: TemperedParams, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact-kernel history weights (A, B) for levels u^0..u^n at t_{n+1/2}.

    The history term equals sum_{k=1}^{n} A[k-1]*u^{k-1} + B[k-1]*u^k with

      A[k-1] = alpha * Int_{t_{k-1}}^{t_k} g(s) (t_k - s)/tau_k ds,
      B[k-1] = alpha * Int_{t_{k-1}}^{t_k} g(s) (s - t_{k-1})/tau_k ds,
      g(s) = exp(-lam (t_{n+1/2}-s)) * (t_{n+1/2}-s)**(-1-alpha),

    each integral by 32-point Gauss-Legendre (the integrand is analytic on
    every closed subinterval, the nearest singularity a half step away, so
    the rule converges geometrically far past the accuracy needed here).
    """
    mesh = params.mesh
    x32, w32 = _legendre_rule(32)
    t_half = mesh.half_points[n]
    left = mesh.nodes[:n]
    right = mesh.nodes[1 : n + 1]
    mid = 0.5 * (left + right)
    halfw = 0.5 * (right - left)
    s_nodes = mid[:, None] + halfw[:, None] * x32[None, :]
    w_quad = halfw[:, None] * w32[None, :]
    wdist = t_half - s_nodes
    g = np.exp(-params.lam * wdist) * wdist ** (-1.0 - params.alpha)
    tau = (right - left)[:, None]
    basis_old = (right[:, None] - s_nodes) / tau
    basis_new = (s_nodes - left[:, None]) / tau
    a_coeff = params.alpha * np.sum(w_quad * g * basis_old, axis=1)
    b_coeff = params.alpha * np.sum(w_quad * g * basis_new, axis=1)
    return a_coeff, b_coeff


def direct_l1_derivative(params: TemperedParams, u_values, n: int) -> float:
    """Reference evaluation of the tempered derivative at t_{n+1/2}.

    Same local term and integrated-by-parts boundary terms as the fast path,
    but the history integral uses the exact kernel (no exponential-sum
    compression), so the two paths differ by the compression error alone.
    Cost is O(n) per call; this is the oracle, not the production path.

    Parameters
    ----------
    u_values : sequence
        Samples u(t_0) .. u(t_{n+1}), length n + 2.
    """
    mesh = params.mesh
    if not 0 <= n <= mesh.n_steps - 1:
        raise InvalidParameterError(
            f"n must lie in [0, {mesh.n_steps - 1}], got {n}"
        )
    u = np.asarray(u_values, dtype=np.float64)
    if u.ndim != 1 or len(u) != n + 2:
        raise DimensionMismatchError(
            f"u_values must have {n + 2} entries for n={n}, got shape {u.shape}"
        )
    alpha = params.alpha
    lam = params.lam
    tp = 0.5 * mesh.steps[n]
    gamma_fac = 1.0 / math.gamma(1.0 - alpha)
    local = (
        (0.5 * (u[n] + u[n + 1]) - math.exp(-lam * tp) * u[n])
        / ((1.0 - alpha) * tp**alpha)
    )
    if n == 0:
        return gamma_fac * local
    t_half = mesh.half_points[n]
    a_coeff, b_coeff = _direct_history_coeffs(params, n)
    hist = float(np.dot(a_coeff, u[:n]) + np.dot(b_coeff, u[1 : n + 1]))
    boundary_new = math.exp(-lam * tp) / tp**alpha * u[n]
    boundary_old = math.exp(-lam * t_half) / t_half**alpha * u[0]
    return gamma_fac * (local + boundary_new - boundary_old - hist)
