#!/usr/bin/env python3

import numpy as np
import pytest

from models.errors import ForwardSolveError
from models.fields import CoefficientField, SpaceTimeField
from models.grid import SpatialGrid, TimePartition, build_grid, classify_nodes
from tools import forward_solver
from tools.forward_solver import (
    ForwardSolver, extended_grid, extract_cauchy, peaks_coefficient, solve_forward,
)
from tools.sources import SourceSpec, source_for_test, sample_source


def embedded_source(spec, grid, solve_grid):
    pad = (solve_grid.n_side - grid.n_side) // 2
    f = np.zeros((solve_grid.n_side, solve_grid.n_side))
    f[pad:pad + grid.n_side, pad:pad + grid.n_side] = sample_source(spec, grid)
    return f


def synthetic_field(grid, func, n_times=3):
    X, Y = grid.mesh()
    values = np.repeat(func(X, Y)[None], n_times, axis=0)
    return SpaceTimeField(grid, TimePartition(1.0, n_times - 1), values)


def test_peaks_at_origin():
    assert peaks_coefficient(0.0, 0.0) == pytest.approx((8.0 / 3.0) * np.exp(-1.0) / 10.0, rel=1e-14)
    assert peaks_coefficient(0.0, 0.0) == pytest.approx(0.098101, abs=1e-6)


def test_peaks_off_center():
    expected = (-2.0 * np.exp(-2.0) - np.exp(-5.0) / 3.0) / 10.0
    assert peaks_coefficient(1.0, -1.0) == pytest.approx(expected, rel=1e-14)


def test_peaks_decays():
    assert abs(peaks_coefficient(10.0, 10.0)) < 1e-10


def test_extended_grid_doubles_domain():
    grid = build_grid(2.0, 80)
    solve_grid = extended_grid(grid)
    assert solve_grid.R == pytest.approx(4.0)
    assert solve_grid.N_x == 160
    assert solve_grid.d_x == pytest.approx(grid.d_x)
    assert extended_grid(grid, inverse_crime=True) == grid


def test_zero_initial_condition_stays_zero():
    grid = SpatialGrid(1.0, 10)
    c = CoefficientField.from_function(grid, peaks_coefficient)
    field = solve_forward(grid, c, np.zeros((11, 11)), TimePartition(1.0, 20))
    assert np.all(field.values == 0.0)


def test_discrete_eigenmode_decay():
    """A sine mode decays by the backward Euler factor of its 5-point eigenvalue."""
    grid = SpatialGrid(1.0, 20)
    partition = TimePartition(0.1, 10)
    p, q = 1, 2
    X, Y = grid.mesh()
    R = grid.R
    f = np.sin(np.pi * p * (X + R) / (2 * R)) * np.sin(np.pi * q * (Y + R) / (2 * R))
    lam = 4.0 / grid.d_x ** 2 * (
        np.sin(np.pi * p * grid.d_x / (4 * R)) ** 2 + np.sin(np.pi * q * grid.d_x / (4 * R)) ** 2
    )
    field = solve_forward(grid, CoefficientField.zeros(grid), f, partition, enforce_free_space=False)
    expected = f * (1.0 + partition.d_t * lam) ** -10
    expected[[0, -1], :] = 0.0
    expected[:, [0, -1]] = 0.0
    np.testing.assert_allclose(field.values[10], expected, atol=1e-10)


def test_initial_slice_is_exact():
    grid = build_grid(2.0, 20)
    solve_grid = extended_grid(grid)
    f = embedded_source(source_for_test(1), grid, solve_grid)
    c = CoefficientField.from_function(solve_grid, peaks_coefficient)
    field = solve_forward(solve_grid, c, f, TimePartition(0.5, 5))
    np.testing.assert_array_equal(field.values[0], f)


def test_mass_conserved_without_coefficient():
    grid = build_grid(2.0, 40)
    solve_grid = extended_grid(grid)
    f = embedded_source(source_for_test(1), grid, solve_grid)
    field = solve_forward(solve_grid, CoefficientField.zeros(solve_grid), f, TimePartition(0.05, 25))
    mass = field.values.sum(axis=(1, 2))
    assert np.max(np.abs(mass - mass[0])) / mass[0] < 1e-8


def test_outer_boundary_stays_quiet():
    grid = build_grid(2.0, 40)
    solve_grid = extended_grid(grid)
    f = embedded_source(source_for_test(1), grid, solve_grid)
    c = CoefficientField.from_function(solve_grid, peaks_coefficient)
    field = solve_forward(solve_grid, c, f, TimePartition(0.05, 25))
    layer = np.concatenate([
        field.values[:, 1, :], field.values[:, -2, :], field.values[:, :, 1], field.values[:, :, -2],
    ], axis=1)
    assert np.max(np.abs(layer)) < 1e-6 * f.max()


def test_max_norm_non_increasing_for_absorbing_coefficient():
    grid = build_grid(2.0, 20)
    solve_grid = extended_grid(grid)
    f = embedded_source(source_for_test(1), grid, solve_grid)
    c = CoefficientField(solve_grid, -np.ones((solve_grid.n_side, solve_grid.n_side)))
    field = solve_forward(solve_grid, c, f, TimePartition(1.0, 20))
    peaks = np.max(np.abs(field.values), axis=(1, 2))
    assert np.all(np.diff(peaks) <= 1e-14)


def test_time_refinement_is_first_order():
    grid = build_grid(1.0, 20)
    solve_grid = extended_grid(grid)
    spec = SourceSpec('bump', centers=((0.0, 0.0),), radius=0.5)
    f = embedded_source(spec, grid, solve_grid)
    c = CoefficientField.from_function(solve_grid, peaks_coefficient)
    traces = []
    for N_T in (50, 100, 200):
        field = solve_forward(solve_grid, c, f, TimePartition(0.5, N_T))
        F = extract_cauchy(field, grid).F
        traces.append(F[::N_T // 50])
    first = np.max(np.abs(traces[0] - traces[1]))
    second = np.max(np.abs(traces[1] - traces[2]))
    assert 1.5 < first / second < 2.8


def test_rejects_source_near_outer_boundary():
    grid = SpatialGrid(1.0, 10)
    f = np.zeros((11, 11))
    f[2, 5] = 1.0
    with pytest.raises(ValueError):
        solve_forward(grid, CoefficientField.zeros(grid), f, TimePartition(1.0, 5))


def test_rejects_wrong_shape():
    grid = SpatialGrid(1.0, 10)
    with pytest.raises(ValueError):
        solve_forward(grid, CoefficientField.zeros(grid), np.zeros((10, 10)), TimePartition(1.0, 5))


def test_residual_check(monkeypatch):
    monkeypatch.setattr(forward_solver, 'RESIDUAL_TOL', -1.0)
    grid = SpatialGrid(1.0, 10)
    f = np.zeros((11, 11))
    f[5, 5] = 1.0
    solver = ForwardSolver(grid, CoefficientField.zeros(grid), TimePartition(1.0, 5))
    with pytest.raises(ForwardSolveError) as excinfo:
        solver.solve(f)
    assert excinfo.value.step == 1


def test_constant_field_traces():
    grid = build_grid(1.0, 8)
    data = extract_cauchy(synthetic_field(grid, lambda X, Y: np.ones_like(X)), grid)
    np.testing.assert_allclose(data.F, 1.0)
    np.testing.assert_allclose(data.G, 0.0, atol=1e-12)


def test_linear_field_traces():
    grid = build_grid(1.0, 8)
    data = extract_cauchy(synthetic_field(grid, lambda X, Y: X), grid)
    expected = {'left': -1.0, 'right': 1.0, 'bottom': 0.0, 'top': 0.0}
    for q, edge in enumerate(data.nodes.edges):
        np.testing.assert_allclose(data.G[:, q], expected[edge], atol=1e-12)


def test_quadratic_field_traces():
    grid = build_grid(1.5, 12)
    data = extract_cauchy(synthetic_field(grid, lambda X, Y: X ** 2), grid)
    right = [q for q, edge in enumerate(data.nodes.edges) if edge == 'right']
    np.testing.assert_allclose(data.G[:, right], 2.0 * grid.R, rtol=1e-12)


def test_traces_from_extended_field():
    grid = build_grid(1.0, 8)
    solve_grid = extended_grid(grid)
    field = synthetic_field(solve_grid, lambda X, Y: X + 2.0 * Y)
    data = extract_cauchy(field, grid, classify_nodes(grid))
    boundary = data.nodes.boundary
    X, Y = grid.mesh()
    expected = X[boundary[:, 0] - 1, boundary[:, 1] - 1] + 2.0 * Y[boundary[:, 0] - 1, boundary[:, 1] - 1]
    np.testing.assert_allclose(data.F[0], expected, atol=1e-12)


def test_misaligned_grids_rejected():
    field = synthetic_field(build_grid(2.0, 80), lambda X, Y: X)
    with pytest.raises(ValueError):
        extract_cauchy(field, build_grid(1.0, 30))


if __name__ == "__main__":
    pytest.main([__file__])
