"""Pure-numpy implementations of the per-step hot kernels.

Mirrors the compiled module's interface exactly; used when the extension is
unavailable or when ``TFDE_BACKEND=numpy`` forces it.
"""

from __future__ import annotations

import numpy as np


def advance_history_inplace(
    values: np.ndarray,
    decay: np.ndarray,
    lam1: np.ndarray,
    lam2: np.ndarray,
    u_curr: np.ndarray,
    u_prev: np.ndarray,
) -> None:
    """values[i, j] <- decay[i]*values[i, j] + lam1[i]*u_curr[j] + lam2[i]*u_prev[j]."""
    values *= decay[:, None]
    values += lam1[:, None] * u_curr[None, :]
    values += lam2[:, None] * u_prev[None, :]


def history_reduce(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Weighted column sums: out[j] = sum_i weights[i] * values[i, j]."""
    return weights @ values


def thomas_solve_core(
    sub: np.ndarray,
    diag: np.ndarray,
    sup: np.ndarray,
    rhs: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Tridiagonal elimination; returns (solution, min |pivot| seen)."""
    m = len(diag)
    x = np.empty(m, dtype=np.float64)
    c_prime = np.empty(m, dtype=np.float64)
    min_pivot = abs(diag[0])
    denom = diag[0]
    c_prime[0] = sup[0] / denom if m > 1 else 0.0
    x[0] = rhs[0] / denom
    for i in range(1, m):
        denom = diag[i] - sub[i - 1] * c_prime[i - 1]
        min_pivot = min(min_pivot, abs(denom))
        if i < m - 1:
            c_prime[i] = sup[i] / denom
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / denom
    for i in range(m - 2, -1, -1):
        x[i] -= c_prime[i] * x[i + 1]
    return x, float(min_pivot)
