"""Ground-truth values for validation.

High-accuracy quadrature of the tempered-memory derivative of power
functions, the closed form it must match when the tempering vanishes, and
the manufactured solution/forcing pair whose exact solution is known in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, ToleranceNotMetError
from .soe import _jacobi_rule

__all__ = [
    "PowerFunction",
    "ManufacturedCase",
    "caputo_power_closed_form",
    "exact_tempered_caputo_power",
    "manufactured_solution",
    "manufactured_initial",
    "manufactured_forcing",
]


@dataclass(frozen=True)
class PowerFunction:
    """Power profile t**exponent with the regularity range 1 < exponent < 2."""

    exponent: float

    def __post_init__(self) -> None:
        if not 1 < self.exponent < 2:
            raise InvalidParameterError(
                f"exponent must lie in (1, 2), got {self.exponent}"
            )


@dataclass(frozen=True)
class ManufacturedCase:
    """Closed-form test problem with known solution.

    The exact solution is u(x, t) = exp(-lam*t) * (t**delta_reg + 1)
    * x**2 * (1-x)**2 on [0, 1]; the matching forcing keeps it an exact
    solution of the advection-dispersion equation with tempered memory.
    """

    alpha: float
    lam: float
    delta_reg: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise InvalidParameterError(
                f"alpha must lie in (0, 1), got {self.alpha}"
            )
        if self.lam < 0:
            raise InvalidParameterError(f"lam must be >= 0, got {self.lam}")
        if not 1 < self.delta_reg < 2:
            raise InvalidParameterError(
                f"delta_reg must lie in (1, 2), got {self.delta_reg}"
            )


def caputo_power_closed_form(delta_reg: float, alpha: float, t: float) -> float:
    """Untempered fractional derivative of t**delta_reg, closed form."""
    return (
        math.gamma(delta_reg + 1.0)
        / math.gamma(delta_reg - alpha + 1.0)
        * t ** (delta_reg - alpha)
    )


def _power_quadrature(
    delta_reg: float, alpha: float, lam: float, t: float, n: int
) -> float:
    """Fixed-order evaluation of Int_0^t (t-s)**(-alpha) (e^{lam s} s^delta)' ds.

    Split at t/2. On [t/2, t] the endpoint factor (t-s)**(-alpha) is the
    Jacobi weight (variable u = t - s); on [0, t/2] the differentiated
    integrand e^{lam s}(lam s^delta + delta s^{delta-1}) splits into two
    Jacobi-weighted pieces with weights s**delta and s**(delta-1), so every
    evaluated factor is analytic and convergence is spectral.
    """
    quarter = 0.25 * t

    x, w = _jacobi_rule(n, -alpha)
    u_nodes = quarter * (1.0 + x)
    s_tail = t - u_nodes
    psi = np.exp(lam * s_tail) * (
        lam * s_tail**delta_reg + delta_reg * s_tail ** (delta_reg - 1.0)
    )
    tail = quarter ** (1.0 - alpha) * float(np.dot(w, psi))

    head = 0.0
    if lam != 0.0:
        x, w = _jacobi_rule(n, delta_reg)
        s_head = quarter * (1.0 + x)
        phi = np.exp(lam * s_head) * (t - s_head) ** (-alpha)
        head += lam * quarter ** (1.0 + delta_reg) * float(np.dot(w, phi))
    x, w = _jacobi_rule(n, delta_reg - 1.0)
    s_head = quarter * (1.0 + x)
    phi = np.exp(lam * s_head) * (t - s_head) ** (-alpha)
    head += delta_reg * quarter**delta_reg * float(np.dot(w, phi))

    return head + tail


def exact_tempered_caputo_power(
    delta_reg: float, alpha: float, lam: float, t: float, tol: float = 1e-11
) -> float:
    """Tempered-memory derivative of t**delta_reg at time t, by quadrature.

    Evaluates e^{-lam t}/Gamma(1-alpha) * Int_0^t (t-s)**(-alpha)
    * d/ds[e^{lam s} s**delta_reg] ds with the order doubled until two
    successive values agree within tol/2 absolutely.

    Raises
    ------
    InvalidParameterError
        For out-of-range parameters or t <= 0.
    ToleranceNotMetError
        If doubling the order up to 384 nodes never meets the tolerance.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if not 1 < delta_reg < 2:
        raise InvalidParameterError(
            f"delta_reg must lie in (1, 2), got {delta_reg}"
        )
    if lam < 0:
        raise InvalidParameterError(f"lam must be >= 0, got {lam}")
    if not t > 0:
        raise InvalidParameterError(f"t must be positive, got {t}")

    prefactor = math.exp(-lam * t) / math.gamma(1.0 - alpha)
    previous = None
    n = 24
    while n <= 384:
        value = prefactor * _power_quadrature(delta_reg, alpha, lam, t, n)
        if previous is not None and abs(value - previous) <= 0.5 * tol:
            return value
        previous = value
        n *= 2
    raise ToleranceNotMetError(
        f"power-function quadrature stalled above tol={tol:g} for "
        f"delta_reg={delta_reg}, alpha={alpha}, lam={lam}, t={t}"
    )


def manufactured_solution(case: ManufacturedCase, x, t):
    """Exact solution e^{-lam t} (t**delta + 1) x**2 (1-x)**2."""
    x = np.asarray(x, dtype=np.float64)
    return (
        math.exp(-case.lam * t)
        * (t**case.delta_reg + 1.0)
        * x**2
        * (1.0 - x) ** 2
    )


def manufactured_initial(x):
    """Initial profile x**2 (1-x)**2 (the exact solution at t = 0)."""
    x = np.asarray(x, dtype=np.float64)
    return x**2 * (1.0 - x) ** 2


def manufactured_forcing(case: ManufacturedCase, x, t):
    """Forcing that makes :func:`manufactured_solution` exact.

    f = (-lam (t^d + 1) + d t^{d-1} + Gamma(d+1)/Gamma(d-a+1) t^{d-a})
        * e^{-lam t} x^2 (1-x)^2
        - ((12x^2 - 12x + 2) - (4x^3 - 6x^2 + 2x)) (t^d + 1) e^{-lam t}
    """
    x = np.asarray(x, dtype=np.float64)
    d = case.delta_reg
    a = case.alpha
    decay = math.exp(-case.lam * t)
    g = t**d + 1.0
    time_part = (
        -case.lam * g
        + d * t ** (d - 1.0)
        + math.gamma(d + 1.0) / math.gamma(d - a + 1.0) * t ** (d - a)
    )
    w = x**2 * (1.0 - x) ** 2
    spatial = (12.0 * x**2 - 12.0 * x + 2.0) - (4.0 * x**3 - 6.0 * x**2 + 2.0 * x)
    return time_part * decay * w - spatial * g * decay
