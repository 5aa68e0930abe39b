"""Temporal mesh and spatial grid construction."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tfde
from tfde.errors import InvalidParameterError


def test_graded_nodes_exact_values() -> None:
    mesh = tfde.graded_mesh(2.0, 4, 2.0)
    assert np.allclose(mesh.nodes, [0.0, 0.125, 0.5, 1.125, 2.0], atol=0.0)
    assert mesh.t_final == 2.0
    assert mesh.n_steps == 4
    assert mesh.grading == 2.0


def test_uniform_mesh_is_grading_one() -> None:
    mesh = tfde.graded_mesh(1.0, 5, 1.0)
    assert np.allclose(mesh.nodes, np.linspace(0.0, 1.0, 6), atol=1e-15)


def test_steps_and_half_points_relate_to_nodes() -> None:
    mesh = tfde.graded_mesh(3.0, 7, 2.5)
    assert np.allclose(mesh.steps, np.diff(mesh.nodes), atol=0.0)
    assert np.allclose(
        mesh.half_points, 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:]), atol=0.0
    )


@settings(max_examples=60, deadline=None)
@given(
    t_final=st.floats(0.1, 10.0),
    n_steps=st.integers(2, 200),
    grading=st.floats(1.0, 5.0),
)
def test_mesh_invariants(t_final: float, n_steps: int, grading: float) -> None:
    mesh = tfde.graded_mesh(t_final, n_steps, grading)
    assert mesh.nodes[0] == 0.0
    # final node is pinned exactly, not merely approximately
    assert mesh.nodes[-1] == t_final
    assert np.all(np.diff(mesh.nodes) > 0.0)
    # steps never shrink as the mesh leaves the origin
    assert np.all(np.diff(mesh.steps) >= -1e-15 * t_final)


@settings(max_examples=60, deadline=None)
@given(
    t_final=st.floats(0.1, 10.0),
    n_steps=st.integers(2, 200),
    grading=st.floats(1.0, 4.0),
)
def test_step_growth_bound(
    t_final: float, n_steps: int, grading: float
) -> None:
    """tau_{k+1} <= r 2^{r-1} T N^{-r} k^{r-1} for every k >= 1."""
    mesh = tfde.graded_mesh(t_final, n_steps, grading)
    const = grading * 2.0 ** (grading - 1.0)
    k = np.arange(1, n_steps)
    bound = const * t_final * n_steps ** (-grading) * k ** (grading - 1.0)
    assert np.all(mesh.steps[1:] <= bound * (1.0 + 1e-12))
    # first step separately: tau_1 = T N^{-r}
    assert mesh.steps[0] <= const * t_final * n_steps ** (-grading) * (
        1.0 + 1e-12
    )


def test_uniform_grid_exact() -> None:
    grid = tfde.uniform_grid(1.0, 4)
    assert grid.spacing == 0.25
    assert np.allclose(grid.nodes, [0.0, 0.25, 0.5, 0.75, 1.0], atol=0.0)
    assert grid.nodes[-1] == 1.0


@settings(max_examples=40, deadline=None)
@given(length=st.floats(0.1, 50.0), n_cells=st.integers(2, 500))
def test_uniform_grid_invariants(length: float, n_cells: int) -> None:
    grid = tfde.uniform_grid(length, n_cells)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == length
    spacings = np.diff(grid.nodes)
    assert np.allclose(spacings, grid.spacing, rtol=1e-12)


def test_step_condition_flags_coarse_steps() -> None:
    mesh = tfde.graded_mesh(2.0, 4, 1.0)
    # (tau/2)^(2-2a) = 0.25 < 1/3 at alpha = 0.5 but 0.25^0.2 > 1/3 at 0.9
    assert tfde.check_step_condition(mesh, 0.5).all()
    assert not tfde.check_step_condition(mesh, 0.9).any()


def test_step_condition_fine_mesh_all_pass() -> None:
    # Largest half-step (2 - 2*(799/800)^2)/2 ~ 2.5e-3; 2.5e-3^0.2 ~ 0.30 < 1/3.
    mesh = tfde.graded_mesh(2.0, 800, 2.0)
    assert tfde.check_step_condition(mesh, 0.9).all()


def test_arrays_are_read_only() -> None:
    mesh = tfde.graded_mesh(1.0, 3, 1.5)
    grid = tfde.uniform_grid(1.0, 3)
    for arr in (mesh.nodes, mesh.steps, mesh.half_points, grid.nodes):
        with pytest.raises(ValueError):
            arr[0] = 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t_final": 0.0, "n_steps": 4, "grading": 1.0},
        {"t_final": -1.0, "n_steps": 4, "grading": 1.0},
        {"t_final": 1.0, "n_steps": 1, "grading": 1.0},
        {"t_final": 1.0, "n_steps": 4, "grading": 0.5},
    ],
)
def test_graded_mesh_rejects_bad_parameters(kwargs: dict) -> None:
    with pytest.raises(InvalidParameterError):
        tfde.graded_mesh(**kwargs)


@pytest.mark.parametrize(
    "length,n_cells", [(0.0, 4), (-2.0, 4), (1.0, 1), (1.0, 0)]
)
def test_uniform_grid_rejects_bad_parameters(
    length: float, n_cells: int
) -> None:
    with pytest.raises(InvalidParameterError):
        tfde.uniform_grid(length, n_cells)


def test_step_condition_rejects_bad_alpha() -> None:
    mesh = tfde.graded_mesh(1.0, 4, 1.0)
    with pytest.raises(InvalidParameterError):
        tfde.check_step_condition(mesh, 1.0)
    with pytest.raises(InvalidParameterError):
        tfde.check_step_condition(mesh, 0.0)
