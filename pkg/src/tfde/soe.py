"""Exponential-sum compression of the memory kernel t**(-1-alpha).

A sum  sum_l w_l * exp(-s_l * t)  uniformly within epsilon of the kernel on
[delta_cut, t_max] is what turns the quadratic-cost convolution history into
an O(n_exp) per-step recurrence. The construction discretizes the integral
representation

    t**(-1-alpha) = (1/Gamma(1+alpha)) * Int_0^inf s**alpha * exp(-t*s) ds

with a Gauss-Jacobi panel near s = 0 (weight s**alpha folded into the rule)
and Gauss-Legendre rules on dyadic panels [a, 2a] up to a tail cutoff chosen
from the incomplete-gamma remainder bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, roots_jacobi, roots_legendre

from .errors import DomainError, InvalidParameterError, SoeConstructionError

__all__ = [
    "SoeApproximation",
    "build_soe",
    "eval_soe",
    "verify_soe",
    "write_soe_csv",
    "read_soe_csv",
]

_EPS = np.finfo(np.float64).eps
# Rounding envelope for the verification gate: evaluating either the kernel
# or the positive sum in doubles carries relative error well inside this
# multiple of machine epsilon, so differences below it are unmeasurable.
_FLOOR_FACTOR = 64.0


@dataclass(frozen=True)
class SoeApproximation:
    """Frozen exponential-sum approximation of t**(-1-alpha).

    Attributes
    ----------
    alpha : float
        Kernel exponent, in (0, 1).
    epsilon : float
        Target uniform absolute error on [delta_cut, t_max].
    delta_cut : float
        Lower end of the validity window (> 0 for built objects).
    t_max : float
        Upper end of the validity window.
    exponents : ndarray
        Decay rates s_l, strictly positive, increasing.
    weights : ndarray
        Positive weights w_l, same length as exponents.
    """

    alpha: float
    epsilon: float
    delta_cut: float
    t_max: float
    exponents: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_exp(self) -> int:
        """Number of exponential terms."""
        return len(self.exponents)


@lru_cache(maxsize=256)
def _jacobi_rule(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_jacobi(n, 0.0, beta)
    return x, w


@lru_cache(maxsize=64)
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x, w


def _tail_cutoff(alpha: float, epsilon: float, delta_cut: float) -> float:
    """Smallest dyadic-friendly S with the discarded tail below epsilon/3.

    The remainder of the integral representation beyond S equals
    t**(-1-alpha) * Q(1+alpha, t*S) with Q the regularized upper incomplete
    gamma; its maximum over the window sits at t = delta_cut.
    """
    target = (epsilon / 3.0) * delta_cut ** (1.0 + alpha)
    s_cut = max(1.0 / delta_cut, 1.0)
    for _ in range(200):
        if gammaincc(1.0 + alpha, delta_cut * s_cut) <= target:
            return s_cut
        s_cut *= 2.0
    raise SoeConstructionError(
        f"tail cutoff search failed for alpha={alpha}, epsilon={epsilon}, "
        f"delta_cut={delta_cut}"
    )


def _quadrature_terms(
    alpha: float, delta_cut: float, t_max: float, s_cut: float, order: int
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the discretized integral representation."""
    inv_gamma = 1.0 / math.gamma(1.0 + alpha)
    nodes = []
    weights = []

    # Head panel [0, s0]: Gauss-Jacobi rule with the s**alpha factor as the
    # quadrature weight, so the evaluated function exp(-t*s) is entire and
    # t*s stays <= t_max * s0 = 1 on the whole window.
    s0 = 1.0 / t_max
    xj, wj = _jacobi_rule(order, alpha)
    nodes.append(s0 * 0.5 * (1.0 + xj))
    weights.append((0.5 * s0) ** (1.0 + alpha) * inv_gamma * wj)

    # Dyadic Gauss-Legendre panels [a, 2a] up to the tail cutoff.
    xl, wl = _legendre_rule(order)
    a = s0
    while a < s_cut:
        s_panel = a * (1.5 + 0.5 * xl)
        nodes.append(s_panel)
        weights.append(0.5 * a * inv_gamma * wl * s_panel**alpha)
        a *= 2.0

    s = np.concatenate(nodes)
    w = np.concatenate(weights)
    order_idx = np.argsort(s)
    return s[order_idx], w[order_idx]


def _max_error_grid(
    exponents: np.ndarray,
    weights: np.ndarray,
    alpha: float,
    t_grid: np.ndarray,
    slack: bool,
) -> float:
    """Max |kernel - sum| over t_grid, optionally minus the rounding floor."""
    worst = -np.inf
    chunk = max(1, int(2_000_000 / max(len(exponents), 1)))
    for start in range(0, len(t_grid), chunk):
        t = t_grid[start : start + chunk]
        approx = weights @ np.exp(-np.outer(exponents, t))
        kernel = t ** (-1.0 - alpha)
        err = np.abs(kernel - approx)
        if slack:
            err = err - _FLOOR_FACTOR * _EPS * kernel
        worst = max(worst, float(err.max()))
    return worst


def build_soe(
    alpha: float, epsilon: float, delta_cut: float, t_max: float
) -> SoeApproximation:
    """Construct an exponential-sum approximation of t**(-1-alpha).

    Parameters
    ----------
    alpha : float
        Kernel exponent, 0 < alpha < 1.
    epsilon : float
        Uniform absolute error target on the window.
    delta_cut : float
        Lower end of the validity window, 0 < delta_cut < t_max.
    t_max : float
        Upper end of the validity window.

    Returns
    -------
    SoeApproximation
        Verified on a dense log-spaced sample before return.

    Raises
    ------
    InvalidParameterError
        For out-of-range arguments.
    SoeConstructionError
        If the sampled error still exceeds the target after the fallback
        order refinements.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if not 0 < delta_cut < t_max:
        raise InvalidParameterError(
            f"need 0 < delta_cut < t_max, got delta_cut={delta_cut}, t_max={t_max}"
        )

    s_cut = _tail_cutoff(alpha, epsilon, delta_cut)
    base_order = 8 + math.ceil(2.2 * math.log10(1.0 / min(epsilon, 0.1)))
    t_grid = np.geomspace(delta_cut, t_max, 10_000)

    last_err = math.inf
    for refinement in range(4):
        order = base_order * 2**refinement
        s, w = _quadrature_terms(alpha, delta_cut, t_max, s_cut, order)

        # Terms whose largest possible contribution on the window is far
        # below epsilon are dead weight; drop them.
        keep = w * np.exp(-s * delta_cut) >= epsilon * 1e-4 / len(s)
        s, w = s[keep], w[keep]

        last_err = _max_error_grid(s, w, alpha, t_grid, slack=True)
        if last_err <= epsilon:
            s.setflags(write=False)
            w.setflags(write=False)
            return SoeApproximation(
                alpha=float(alpha),
                epsilon=float(epsilon),
                delta_cut=float(delta_cut),
                t_max=float(t_max),
                exponents=s,
                weights=w,
            )

    raise SoeConstructionError(
        f"exponential-sum construction missed target {epsilon:g} "
        f"(best sampled error {last_err:g}) for alpha={alpha}, "
        f"window [{delta_cut:g}, {t_max:g}]"
    )


def eval_soe(soe: SoeApproximation, t: float) -> float:
    """Evaluate the exponential sum at one point of its validity window.

    Raises
    ------
    DomainError
        If t lies outside [delta_cut, t_max] (up to 1 part in 1e12).
    """
    lo = soe.delta_cut * (1.0 - 1e-12)
    hi = soe.t_max * (1.0 + 1e-12)
    if not lo <= t <= hi:
        raise DomainError(
            f"t={t} outside the approximation window "
            f"[{soe.delta_cut}, {soe.t_max}]"
        )
    return math.fsum(w * math.exp(-s * t) for s, w in zip(soe.exponents, soe.weights))


def verify_soe(soe: SoeApproximation, sample_count: int = 10_000) -> float:
    """Max absolute kernel error over log-spaced samples of the window.

    Returns the plain measured maximum of |t**(-1-alpha) - sum(t)|; no
    rounding allowance is applied.

    Raises
    ------
    InvalidParameterError
        If sample_count < 2.
    """
    if sample_count < 2:
        raise InvalidParameterError(
            f"sample_count must be >= 2, got {sample_count}"
        )
    t_grid = np.geomspace(soe.delta_cut, soe.t_max, sample_count)
    return _max_error_grid(
        np.asarray(soe.exponents), np.asarray(soe.weights), soe.alpha, t_grid, slack=False
    )


def write_soe_csv(soe: SoeApproximation, path: str) -> None:
    """Dump (exponent, weight) pairs with window metadata as CSV."""
    lines = [
        f"# alpha={soe.alpha!r}",
        f"# epsilon={soe.epsilon!r}",
        f"# delta_cut={soe.delta_cut!r}",
        f"# t_max={soe.t_max!r}",
        "exponent,weight",
    ]
    lines += [f"{s:.17g},{w:.17g}" for s, w in zip(soe.exponents, soe.weights)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_soe_csv(path: str) -> SoeApproximation:
    """Read back an approximation written by :func:`write_soe_csv`."""
    meta: dict[str, float] = {}
    exps: list[float] = []
    wts: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = float(value)
            elif line.lower().startswith("exponent"):
                continue
            else:
                s_str, _, w_str = line.partition(",")
                exps.append(float(s_str))
                wts.append(float(w_str))
    missing = {"alpha", "epsilon", "delta_cut", "t_max"} - set(meta)
    if missing:
        raise InvalidParameterError(
            f"soe csv {path!r} missing metadata keys {sorted(missing)}"
        )
    exponents = np.asarray(exps, dtype=np.float64)
    weights = np.asarray(wts, dtype=np.float64)
    exponents.setflags(write=False)
    weights.setflags(write=False)
    return SoeApproximation(
        alpha=meta["alpha"],
        epsilon=meta["epsilon"],
        delta_cut=meta["delta_cut"],
        t_max=meta["t_max"],
        exponents=exponents,
        weights=weights,
    )
