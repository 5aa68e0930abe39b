"""Command-line front end: parse configuration, dispatch, write outputs.

Configuration is flat ``key = value`` text (or the mirrored flags; flags
win). Every experiment fills unset keys from its own defaults, so
``tfde table1`` alone reproduces the published derivative-error study for
one alpha. Outputs are written atomically: a temp file in the target
directory is renamed over the destination, so interrupted runs never leave
truncated tables.

Exit codes: 0 success, 1 configuration or validation failure, 2 numerical
failure (kernel construction, solver breakdown, oracle tolerance miss).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, TfdeError
from .harness import (
    manufactured_solution_sweep,
    power_derivative_sweep,
    render_csv,
    render_jsonl,
    render_markdown,
    render_stability_csv,
    render_timing_csv,
    run_stability_suite,
    run_timing_sweep,
)
from .meshes import graded_mesh, uniform_grid
from .oracles import ManufacturedCase, manufactured_forcing, manufactured_initial
from .soe import build_soe, verify_soe, write_soe_csv
from .solver import ProblemSpec, render_solution_csv, solve, write_solution_binary

__all__ = ["RunConfig", "parse_config", "main"]

_EXPERIMENTS = (
    "soe-check",
    "deriv-table",
    "solve",
    "table1",
    "table2",
    "stability",
    "timing",
)
_FORMATS = ("csv", "markdown", "jsonl", "bin")
_PROBLEMS = ("zero", "manufactured")

_GLOBAL_DEFAULTS: dict[str, object] = {
    "alpha": 0.5,
    "lambda": 1.0,
    "T": 2.0,
    "L": 1.0,
    "N": 64,
    "M": 32,
    "epsilon": 1e-10,
    "seed": 42,
    "trials": 20,
    "problem": "manufactured",
    "format": "csv",
    "output": None,
}

# Per-experiment defaults layered over the globals; epsilon is tightened
# for table1 so kernel-compression error stays below the finest row.
_EXPERIMENT_DEFAULTS: dict[str, dict[str, object]] = {
    "soe-check": {"r": 1.5, "delta_reg": 1.5, "n_min": 80, "n_max": 640},
    "deriv-table": {"r": 1.5, "delta_reg": 1.5, "n_min": 80, "n_max": 640},
    "table1": {
        "r": 1.5,
        "delta_reg": 1.5,
        "n_min": 80,
        "n_max": 640,
        "epsilon": 1e-12,
    },
    "table2": {"r": 3.0, "delta_reg": 1.8, "n_min": 10, "n_max": 160},
    "solve": {"r": 3.0, "delta_reg": 1.8, "n_min": 10, "n_max": 160},
    "stability": {"r": 3.0, "delta_reg": 1.8, "n_min": 10, "n_max": 160},
    "timing": {"r": 1.5, "delta_reg": 1.5, "n_min": 256, "n_max": 1024},
}

_KNOWN_KEYS = (
    "experiment",
    "alpha",
    "lambda",
    "delta_reg",
    "r",
    "T",
    "L",
    "N",
    "M",
    "n_min",
    "n_max",
    "epsilon",
    "seed",
    "trials",
    "problem",
    "format",
    "output",
)

# Output formats each experiment can emit.
_ALLOWED_FORMATS: dict[str, tuple[str, ...]] = {
    "soe-check": ("csv",),
    "deriv-table": ("csv", "markdown", "jsonl"),
    "table1": ("csv", "markdown", "jsonl"),
    "table2": ("csv", "markdown", "jsonl"),
    "solve": ("csv", "bin"),
    "stability": ("csv",),
    "timing": ("csv",),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters with every default resolved."""

    experiment: str
    alpha: float
    lam: float
    delta_reg: float
    grading: float
    t_final: float
    domain_length: float
    n_steps: int
    n_cells: int
    n_min: int
    n_max: int
    epsilon: float
    seed: int
    trials: int
    problem: str
    fmt: str
    output: str | None


def _as_float(key: str, raw: object) -> float:
    try:
        return float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a real number, got {raw!r}") from None


def _as_int(key: str, raw: object) -> int:
    if isinstance(raw, bool):
        raise ConfigError(f"{key} must be an integer, got {raw!r}")
    if isinstance(raw, int):
        return raw
    try:
        text = str(raw).strip()
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def _parse_config_text(text: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def parse_config(
    text: str | None = None,
    flags: Mapping[str, object] | None = None,
) -> RunConfig:
    """Merge config-file text, flags, and defaults into a RunConfig.

    Flags override file values; experiment-specific defaults fill the
    rest. Raises ConfigError naming the offending key/line for unknown
    keys, malformed values, or violated parameter ranges.
    """
    values = _parse_config_text(text) if text else {}
    if flags:
        for key, value in flags.items():
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown flag key {key!r}")
            if value is not None:
                values[key] = value

    experiment = values.get("experiment")
    if experiment is None:
        raise ConfigError(
            "experiment is required (one of: " + ", ".join(_EXPERIMENTS) + ")"
        )
    experiment = str(experiment)
    if experiment not in _EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r} (expected one of: "
            + ", ".join(_EXPERIMENTS)
            + ")"
        )

    merged: dict[str, object] = dict(_GLOBAL_DEFAULTS)
    merged.update(_EXPERIMENT_DEFAULTS[experiment])
    merged.update(values)

    alpha = _as_float("alpha", merged["alpha"])
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must satisfy 0 < alpha < 1, got {alpha}")
    lam = _as_float("lambda", merged["lambda"])
    if lam < 0.0:
        raise ConfigError(f"lambda must satisfy lambda >= 0, got {lam}")
    delta_reg = _as_float("delta_reg", merged["delta_reg"])
    if not 1.0 < delta_reg < 2.0:
        raise ConfigError(
            f"delta_reg must satisfy 1 < delta_reg < 2, got {delta_reg}"
        )
    grading = _as_float("r", merged["r"])
    if grading < 1.0:
        raise ConfigError(f"r must satisfy r >= 1, got {grading}")
    t_final = _as_float("T", merged["T"])
    if t_final <= 0.0:
        raise ConfigError(f"T must satisfy T > 0, got {t_final}")
    domain_length = _as_float("L", merged["L"])
    if domain_length <= 0.0:
        raise ConfigError(f"L must satisfy L > 0, got {domain_length}")
    n_steps = _as_int("N", merged["N"])
    if n_steps < 2:
        raise ConfigError(f"N must satisfy N >= 2, got {n_steps}")
    n_cells = _as_int("M", merged["M"])
    if n_cells < 2:
        raise ConfigError(f"M must satisfy M >= 2, got {n_cells}")
    n_min = _as_int("n_min", merged["n_min"])
    if n_min < 2:
        raise ConfigError(f"n_min must satisfy n_min >= 2, got {n_min}")
    n_max = _as_int("n_max", merged["n_max"])
    if n_max < n_min:
        raise ConfigError(
            f"n_max must satisfy n_max >= n_min, got {n_max} < {n_min}"
        )
    current = n_min
    while current < n_max:
        current *= 2
    if current != n_max:
        raise ConfigError(
            f"n_max must be n_min times a power of 2, got {n_min}..{n_max}"
        )
    epsilon = _as_float("epsilon", merged["epsilon"])
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(
            f"epsilon must satisfy 0 < epsilon < 1, got {epsilon}"
        )
    seed = _as_int("seed", merged["seed"])
    trials = _as_int("trials", merged["trials"])
    if trials < 1:
        raise ConfigError(f"trials must satisfy trials >= 1, got {trials}")
    problem = str(merged["problem"])
    if problem not in _PROBLEMS:
        raise ConfigError(
            f"problem must be one of {', '.join(_PROBLEMS)}, got {problem!r}"
        )
    fmt = str(merged["format"])
    if fmt not in _FORMATS:
        raise ConfigError(
            f"format must be one of {', '.join(_FORMATS)}, got {fmt!r}"
        )
    if fmt not in _ALLOWED_FORMATS[experiment]:
        raise ConfigError(
            f"format {fmt!r} is not valid for {experiment} (allowed: "
            + ", ".join(_ALLOWED_FORMATS[experiment])
            + ")"
        )
    output = merged["output"]
    output_path = str(output) if output is not None else None
    if experiment == "solve" and fmt == "bin" and output_path is None:
        raise ConfigError("format=bin requires an output path")

    return RunConfig(
        experiment=experiment,
        alpha=alpha,
        lam=lam,
        delta_reg=delta_reg,
        grading=grading,
        t_final=t_final,
        domain_length=domain_length,
        n_steps=n_steps,
        n_cells=n_cells,
        n_min=n_min,
        n_max=n_max,
        epsilon=epsilon,
        seed=seed,
        trials=trials,
        problem=problem,
        fmt=fmt,
        output=output_path,
    )


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_via(writer, path: str) -> None:
    """Run ``writer(tmp_path)`` then rename the temp file over ``path``."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        _atomic_write_text(output, text)


def _doubling_chain(n_min: int, n_max: int) -> tuple[int, ...]:
    values = [n_min]
    while values[-1] < n_max:
        values.append(values[-1] * 2)
    return tuple(values)


def _render_table(table, fmt: str) -> str:
    if fmt == "markdown":
        return render_markdown(table)
    if fmt == "jsonl":
        return render_jsonl(table)
    return render_csv(table)


def _run_soe_check(cfg: RunConfig) -> int:
    mesh = graded_mesh(cfg.t_final, cfg.n_steps, cfg.grading)
    delta_cut = min(float(mesh.steps[0]), 0.5 * float(mesh.steps[1]))
    soe = build_soe(cfg.alpha, cfg.epsilon, delta_cut, cfg.t_final)
    error = verify_soe(soe)
    if cfg.output is not None:
        _atomic_write_via(lambda tmp: write_soe_csv(soe, tmp), cfg.output)
    print(
        f"terms={soe.n_exp} verified_error={error:.6e} "
        f"epsilon={cfg.epsilon:.6e} delta_cut={delta_cut:.6e} "
        f"t_max={cfg.t_final:.6e}"
    )
    # Verification samples the raw kernel difference, which cannot beat the
    # rounding of terms ~ t^(-1-alpha) themselves; allow that floor.
    fp_floor = 64.0 * float(np.finfo(np.float64).eps) * delta_cut ** (
        -1.0 - cfg.alpha
    )
    if error > cfg.epsilon + fp_floor:
        print(
            f"error: verified kernel error {error:.6e} exceeds "
            f"epsilon + round-off floor {cfg.epsilon + fp_floor:.6e}",
            file=sys.stderr,
        )
        return 2
    return 0


def _run_table(cfg: RunConfig) -> int:
    n_values = _doubling_chain(cfg.n_min, cfg.n_max)
    if cfg.experiment in {"deriv-table", "table1"}:
        tables = power_derivative_sweep(
            [cfg.alpha],
            cfg.grading,
            cfg.delta_reg,
            n_values,
            cfg.epsilon,
            t_final=cfg.t_final,
            lam=cfg.lam,
        )
    else:
        tables = manufactured_solution_sweep(
            [cfg.alpha],
            cfg.grading,
            cfg.delta_reg,
            n_values,
            cfg.epsilon,
            t_final=cfg.t_final,
            lam=cfg.lam,
            domain_length=cfg.domain_length,
        )
    table = tables[cfg.alpha]
    _emit(_render_table(table, cfg.fmt), cfg.output)
    return 0


def _run_solve(cfg: RunConfig) -> int:
    mesh = graded_mesh(cfg.t_final, cfg.n_steps, cfg.grading)
    grid = uniform_grid(cfg.domain_length, cfg.n_cells)
    if cfg.problem == "zero":

        def initial(x: np.ndarray) -> np.ndarray:
            return np.zeros_like(x)

        def forcing(x: np.ndarray, t: float) -> np.ndarray:
            return np.zeros_like(x)

    else:
        case = ManufacturedCase(
            alpha=cfg.alpha, lam=cfg.lam, delta_reg=cfg.delta_reg
        )
        initial = manufactured_initial

        def forcing(x: np.ndarray, t: float) -> np.ndarray:
            return manufactured_forcing(case, x, t)

    spec = ProblemSpec(
        domain_length=cfg.domain_length,
        t_final=cfg.t_final,
        alpha=cfg.alpha,
        lam=cfg.lam,
        initial_condition=initial,
        forcing=forcing,
    )
    solution = solve(spec, mesh, grid, epsilon=cfg.epsilon)
    if cfg.fmt == "bin":
        _atomic_write_via(
            lambda tmp: write_solution_binary(solution, tmp), cfg.output
        )
        return 0
    _emit(render_solution_csv(solution), cfg.output)
    return 0


def _run_stability(cfg: RunConfig) -> int:
    report = run_stability_suite(
        alpha=cfg.alpha,
        lam=cfg.lam,
        t_final=cfg.t_final,
        domain_length=cfg.domain_length,
        n_steps=cfg.n_steps,
        n_cells=cfg.n_cells,
        grading=cfg.grading,
        trials=cfg.trials,
        seed=cfg.seed,
        epsilon=cfg.epsilon,
    )
    _emit(render_stability_csv(report), cfg.output)
    if report.max_ratio > 1.0 + 1e-10:
        print(
            f"error: stability ratio {report.max_ratio:.12g} exceeds "
            "1 + 1e-10",
            file=sys.stderr,
        )
        return 2
    return 0


def _run_timing(cfg: RunConfig) -> int:
    report = run_timing_sweep(
        alpha=cfg.alpha,
        lam=cfg.lam,
        delta_reg=cfg.delta_reg,
        grading=cfg.grading,
        t_final=cfg.t_final,
        n_values=_doubling_chain(cfg.n_min, cfg.n_max),
        repeats=3,
        epsilon=cfg.epsilon,
    )
    _emit(render_timing_csv(report), cfg.output)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="tfde",
        description=(
            "Tempered fractional advection-dispersion solver and "
            "experiment harness."
        ),
    )
    parser.add_argument(
        "experiment",
        nargs="?",
        default=None,
        help="one of: " + ", ".join(_EXPERIMENTS),
    )
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--alpha", help="fractional order in (0, 1)")
    parser.add_argument(
        "--lambda", dest="lam", help="tempering parameter, >= 0"
    )
    parser.add_argument(
        "--delta",
        "--delta-reg",
        dest="delta_reg",
        help="solution regularity exponent in (1, 2)",
    )
    parser.add_argument("--r", help="temporal mesh grading, >= 1")
    parser.add_argument("--T", help="final time, > 0")
    parser.add_argument("--L", help="domain length, > 0")
    parser.add_argument("--N", help="number of time steps (solve/stability)")
    parser.add_argument("--M", help="number of spatial cells")
    parser.add_argument("--n-min", help="coarsest mesh size of a sweep")
    parser.add_argument("--n-max", help="finest mesh size of a sweep")
    parser.add_argument("--epsilon", help="kernel compression tolerance")
    parser.add_argument("--seed", help="random seed for stability trials")
    parser.add_argument("--trials", help="number of stability trials")
    parser.add_argument(
        "--problem", help="solve subject: " + ", ".join(_PROBLEMS)
    )
    parser.add_argument(
        "--format",
        dest="fmt",
        help="output format: " + ", ".join(_FORMATS),
    )
    parser.add_argument("--output", "-o", help="output file path")
    return parser


_DISPATCH = {
    "soe-check": _run_soe_check,
    "deriv-table": _run_table,
    "table1": _run_table,
    "table2": _run_table,
    "solve": _run_solve,
    "stability": _run_stability,
    "timing": _run_timing,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = list(sys.argv[1:]) if argv is None else list(argv)
    if not args:
        parser = _build_parser()
        parser.print_usage(sys.stderr)
        print(
            "experiments: " + ", ".join(_EXPERIMENTS),
            file=sys.stderr,
        )
        return 1
    try:
        parser = _build_parser()
        namespace = parser.parse_args(args)
        text = None
        if namespace.config is not None:
            try:
                with open(namespace.config, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(
                    f"cannot read config file {namespace.config!r}: {exc}"
                ) from None
        flags = {
            "experiment": namespace.experiment,
            "alpha": namespace.alpha,
            "lambda": namespace.lam,
            "delta_reg": namespace.delta_reg,
            "r": namespace.r,
            "T": namespace.T,
            "L": namespace.L,
            "N": namespace.N,
            "M": namespace.M,
            "n_min": namespace.n_min,
            "n_max": namespace.n_max,
            "epsilon": namespace.epsilon,
            "seed": namespace.seed,
            "trials": namespace.trials,
            "problem": namespace.problem,
            "format": namespace.fmt,
            "output": namespace.output,
        }
        cfg = parse_config(text, flags)
        return _DISPATCH[cfg.experiment](cfg)
    except SystemExit as exc:  # argparse -h/--help
        code = exc.code
        return int(code) if code is not None else 0
    except TfdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, ValueError) else 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
