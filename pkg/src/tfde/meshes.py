"""Temporal and spatial meshes.

The time mesh is graded toward t = 0, ``t_n = T * (n/N)**r`` with r >= 1, so
that the steps resolve solutions whose derivatives blow up like a fractional
power at the initial time. The spatial grid is uniform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "TemporalMesh",
    "SpatialGrid",
    "graded_mesh",
    "uniform_grid",
    "check_step_condition",
]


@dataclass(frozen=True)
class TemporalMesh:
    """Graded time mesh on [0, t_final].

    Attributes
    ----------
    t_final : float
        Right endpoint T.
    n_steps : int
        Number of steps N; the mesh has N + 1 nodes.
    grading : float
        Grading exponent r >= 1; r = 1 is the uniform mesh.
    nodes : ndarray, shape (N + 1,)
        t_0 = 0, ..., t_N = T.
    steps : ndarray, shape (N,)
        steps[k] = nodes[k + 1] - nodes[k], i.e. the step ending at level
        k + 1. Nondecreasing for r >= 1.
    half_points : ndarray, shape (N,)
        half_points[n] = (nodes[n] + nodes[n + 1]) / 2, the collocation
        points of the scheme.
    """

    t_final: float
    n_steps: int
    grading: float
    nodes: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)
    half_points: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform spatial grid on [0, length] with n_cells cells."""

    length: float
    n_cells: int
    spacing: float
    nodes: np.ndarray = field(repr=False)


def graded_mesh(t_final: float, n_steps: int, grading: float) -> TemporalMesh:
    """Build the graded time mesh t_n = t_final * (n / n_steps)**grading.

    Parameters
    ----------
    t_final : float
        Final time T > 0.
    n_steps : int
        Step count N >= 2.
    grading : float
        Exponent r >= 1.

    Returns
    -------
    TemporalMesh

    Raises
    ------
    InvalidParameterError
        If any argument is out of range.
    """
    if not t_final > 0:
        raise InvalidParameterError(f"t_final must be positive, got {t_final}")
    if n_steps < 2:
        raise InvalidParameterError(f"n_steps must be >= 2, got {n_steps}")
    if grading < 1:
        raise InvalidParameterError(f"grading must be >= 1, got {grading}")

    n = np.arange(n_steps + 1, dtype=np.float64)
    nodes = t_final * (n / n_steps) ** grading
    # Pin the endpoint: error norms are evaluated at t_N and must not see
    # rounding drift from the power formula.
    nodes[-1] = t_final
    steps = np.diff(nodes)
    half_points = 0.5 * (nodes[:-1] + nodes[1:])
    nodes.setflags(write=False)
    steps.setflags(write=False)
    half_points.setflags(write=False)
    return TemporalMesh(
        t_final=float(t_final),
        n_steps=int(n_steps),
        grading=float(grading),
        nodes=nodes,
        steps=steps,
        half_points=half_points,
    )


def uniform_grid(length: float, n_cells: int) -> SpatialGrid:
    """Build the uniform spatial grid x_i = i * length / n_cells.

    Raises
    ------
    InvalidParameterError
        If length <= 0 or n_cells < 2.
    """
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    if n_cells < 2:
        raise InvalidParameterError(f"n_cells must be >= 2, got {n_cells}")
    h = length / n_cells
    nodes = np.arange(n_cells + 1, dtype=np.float64) * h
    nodes[-1] = length
    nodes.setflags(write=False)
    return SpatialGrid(length=float(length), n_cells=int(n_cells), spacing=h, nodes=nodes)


def check_step_condition(mesh: TemporalMesh, alpha: float) -> np.ndarray:
    """Check (step/2)**(2 - 2*alpha) < 1/3 for every step.

    The marching scheme's stability argument uses this bound; it is a mild
    restriction that ordinary resolutions satisfy easily. The solver warns
    (does not abort) when some step violates it.

    Returns
    -------
    ndarray of bool, shape (N,)
        True where the condition holds.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return (0.5 * mesh.steps) ** (2.0 - 2.0 * alpha) < 1.0 / 3.0
