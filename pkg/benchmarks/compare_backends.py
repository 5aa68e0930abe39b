"""Compare the compiled kernels against the numpy fallback.

Times the three per-step hot kernels in-process (both implementations are
importable side by side) and, optionally, a full manufactured-problem solve
per backend in subprocesses, since the production backend is fixed at
import time.

Usage::

    python3 benchmarks/compare_backends.py [--repeats 5] [--skip-solve]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from tfde._kernels import _kernels_py

try:
    from tfde._kernels import _kernels_c
except ImportError:
    _kernels_c = None

N_EXP = 600
WIDTH = 31
M_CELLS = 127


def _best(stmt, repeats: int, number: int) -> float:
    return min(timeit.repeat(stmt, repeat=repeats, number=number)) / number


def bench_kernels(repeats: int) -> None:
    rng = np.random.default_rng(7)
    values = rng.normal(size=(N_EXP, WIDTH))
    decay = rng.uniform(0.1, 0.999, size=N_EXP)
    lam1 = rng.uniform(0.0, 1.0, size=N_EXP)
    lam2 = rng.uniform(0.0, 1.0, size=N_EXP)
    u_curr = rng.normal(size=WIDTH)
    u_prev = rng.normal(size=WIDTH)
    weights = rng.uniform(0.0, 1.0, size=N_EXP)
    diag = 3.0 + rng.uniform(0.0, 1.0, size=M_CELLS)
    band = rng.uniform(-0.5, 0.5, size=M_CELLS)
    rhs = rng.normal(size=M_CELLS)

    cases = [
        (
            "advance_history_inplace",
            lambda impl: impl.advance_history_inplace(
                values.copy(), decay, lam1, lam2, u_curr, u_prev
            ),
            2000,
        ),
        (
            "history_reduce",
            lambda impl: impl.history_reduce(weights, values),
            5000,
        ),
        (
            "thomas_solve_core",
            lambda impl: impl.thomas_solve_core(band, diag, band, rhs),
            5000,
        ),
    ]

    print(f"kernel shapes: history ({N_EXP}, {WIDTH}), tridiagonal m={M_CELLS}")
    header = f"{'kernel':<26} {'numpy':>12} {'cython':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call, number in cases:
        t_py = _best(lambda: call(_kernels_py), repeats, number)
        if _kernels_c is None:
            print(f"{name:<26} {t_py * 1e6:>10.2f}us {'n/a':>12} {'n/a':>9}")
            continue
        t_c = _best(lambda: call(_kernels_c), repeats, number)
        print(
            f"{name:<26} {t_py * 1e6:>10.2f}us {t_c * 1e6:>10.2f}us "
            f"{t_py / t_c:>8.2f}x"
        )


_SOLVE_SNIPPET = """
import time
import numpy as np
import tfde

case = tfde.ManufacturedCase(alpha=0.4, lam=1.0, delta_reg=1.8)
spec = tfde.ProblemSpec(
    domain_length=1.0, t_final=2.0, alpha=0.4, lam=1.0,
    initial_condition=tfde.manufactured_initial,
    forcing=lambda x, t: tfde.manufactured_forcing(case, x, t),
)
mesh = tfde.graded_mesh(2.0, 64, 2.0)
grid = tfde.uniform_grid(1.0, 64)
delta_cut = min(float(mesh.steps[0]), 0.5 * float(mesh.steps[1]))
soe = tfde.build_soe(0.4, 1e-10, delta_cut, 2.0)
best = float("inf")
for _ in range({repeats}):
    start = time.perf_counter()
    tfde.solve(spec, mesh, grid, soe=soe)
    best = min(best, time.perf_counter() - start)
print(f"{{tfde.backend}} {{best:.6f}}")
"""


def bench_solve(repeats: int) -> None:
    print()
    print("full solve, manufactured problem, N=M=64 (best of repeats):")
    for backend in ("numpy", "cython"):
        if backend == "cython" and _kernels_c is None:
            print("  cython: n/a (extension not built)")
            continue
        env = dict(os.environ)
        env["TFDE_BACKEND"] = backend
        proc = subprocess.run(
            [sys.executable, "-c", _SOLVE_SNIPPET.format(repeats=repeats)],
            capture_output=True,
            text=True,
            env=env,
        )
        if proc.returncode != 0:
            print(f"  {backend}: failed\n{proc.stderr}")
            continue
        name, seconds = proc.stdout.split()
        print(f"  {name}: {float(seconds) * 1e3:.2f} ms")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--skip-solve", action="store_true")
    args = parser.parse_args()
    bench_kernels(args.repeats)
    if not args.skip_solve:
        bench_solve(args.repeats)
    return 0


if __name__ == "__main__":
    sys.exit(main())
