#!/usr/bin/env python3

import numpy as np
import pytest

from models.errors import BasisError
from models.grid import TimePartition
from tools import time_basis
from tools.time_basis import build_basis, coupling_matrix, evaluate


@pytest.fixture(scope='module')
def full_basis():
    return build_basis(30, TimePartition(4.0, 250))


def integration_by_parts_gap(N, N_T):
    basis = build_basis(N, TimePartition(4.0, N_T))
    S = coupling_matrix(basis)
    end, start = basis.samples[-1], basis.samples[0]
    boundary = np.outer(end, end) - np.outer(start, start)
    return np.max(np.abs(S + S.T - boundary))


def test_single_function_normalization():
    partition = TimePartition(4.0, 250)
    basis = build_basis(1, partition)
    w = partition.trapezoid_weights()
    norm = np.sqrt(np.sum(w * np.exp(2.0 * (partition.t - 2.0))))
    assert basis.gram()[0, 0] == pytest.approx(1.0, abs=1e-12)
    value, derivative = evaluate(basis, 1, 2.0)
    assert value > 0
    assert value == pytest.approx(1.0 / norm, rel=1e-12)
    assert derivative == pytest.approx(value, rel=1e-12)


def test_full_basis_is_orthonormal(full_basis):
    gram = full_basis.gram()
    np.testing.assert_allclose(gram, np.eye(30), atol=1e-10)


def test_first_coupling_entry(full_basis):
    S = coupling_matrix(full_basis)
    assert S.shape == (30, 30)
    assert S[0, 0] == pytest.approx(1.0, abs=1e-8)


def test_three_functions_orthogonal():
    basis = build_basis(3, TimePartition(4.0, 250))
    psi = basis.samples
    assert abs(basis.inner(psi[:, 0], psi[:, 1])) < 1e-12
    assert abs(basis.inner(psi[:, 0], psi[:, 2])) < 1e-12
    assert abs(basis.inner(psi[:, 1], psi[:, 2])) < 1e-12


def test_integration_by_parts_second_order():
    """s_mn + s_nm matches the boundary terms up to an O(d_t^2) quadrature error."""
    gaps = [integration_by_parts_gap(5, N_T) for N_T in (250, 500, 1000)]
    assert gaps[0] < 5e-2
    for coarse, fine in zip(gaps, gaps[1:]):
        assert 3.0 < coarse / fine < 5.0


def test_coupling_converges_under_refinement():
    S = [coupling_matrix(build_basis(5, TimePartition(4.0, N_T))) for N_T in (250, 500, 1000)]
    first = np.max(np.abs(S[0] - S[1]))
    second = np.max(np.abs(S[1] - S[2]))
    assert second < first / 3.0


def test_leading_coefficient_and_degree():
    basis = build_basis(6, TimePartition(4.0, 250))
    coeffs = basis.coeffs
    for n in range(1, 7):
        assert coeffs[n - 1, n - 1] > 0
        assert np.all(coeffs[n - 1, n:] == 0.0)


def test_second_function_at_center():
    basis = build_basis(2, TimePartition(4.0, 250))
    assert basis.evaluate(2, basis.t0) == pytest.approx(basis.coeffs[1, 0], rel=1e-12)


def test_evaluate_matches_samples():
    basis = build_basis(10, TimePartition(4.0, 250))
    for n in (1, 3, 10):
        for k in (0, 17, 250):
            t = basis.partition.t[k]
            assert basis.evaluate(n, t) == pytest.approx(basis.samples[k, n - 1], rel=1e-12, abs=1e-12)
            assert basis.evaluate(n, t, derivative=True) == pytest.approx(
                basis.deriv_samples[k, n - 1], rel=1e-11, abs=1e-11)


def test_derivative_from_monomial_coefficients():
    basis = build_basis(6, TimePartition(4.0, 250))
    coeffs = basis.coeffs
    for t in (0.0, 1.3, 2.0, 3.7):
        s = t - basis.t0
        for n in range(1, 7):
            c = coeffs[n - 1]
            k = np.arange(len(c))
            expected = np.sum(c * (k * s ** np.maximum(k - 1, 0) + s ** k)) * np.exp(s)
            assert basis.evaluate(n, t, derivative=True) == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_derivatives_never_vanish(full_basis):
    assert np.all(np.max(np.abs(full_basis.deriv_samples), axis=0) > 0)


def test_derivative_matches_central_differences():
    errors = []
    for N_T in (250, 500):
        basis = build_basis(5, TimePartition(4.0, N_T))
        psi = basis.samples
        central = (psi[2:] - psi[:-2]) / (2.0 * basis.partition.d_t)
        errors.append(np.max(np.abs(central - basis.deriv_samples[1:-1])))
    assert errors[0] < 1e-2 * np.max(np.abs(basis.deriv_samples))
    assert 3.0 < errors[0] / errors[1] < 5.0


def test_projection_reproduces_span_member():
    basis = build_basis(10, TimePartition(4.0, 250))
    t = basis.partition.t
    g = t ** 2 * np.exp(t - basis.t0)
    approx = basis.samples @ basis.project(g)
    assert np.linalg.norm(approx - g) / np.linalg.norm(g) <= 1e-8


def test_projection_approximates_plain_polynomial():
    basis = build_basis(10, TimePartition(4.0, 250))
    t = basis.partition.t
    g = t ** 2
    approx = basis.samples @ basis.project(g)
    assert np.linalg.norm(approx - g) / np.linalg.norm(g) <= 1e-3


def test_euclidean_inner_product():
    basis = build_basis(5, TimePartition(4.0, 250), inner_product='euclidean')
    np.testing.assert_array_equal(basis.weights, np.ones(251))
    np.testing.assert_allclose(basis.samples.T @ basis.samples, np.eye(5), atol=1e-10)
    S = coupling_matrix(basis)
    np.testing.assert_allclose(S, basis.samples.T @ basis.deriv_samples, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize('N', [0, 11])
def test_invalid_order(N):
    with pytest.raises(ValueError):
        build_basis(N, TimePartition(1.0, 10))


def test_out_of_range_index():
    basis = build_basis(3, TimePartition(1.0, 10))
    with pytest.raises(ValueError):
        basis.evaluate(4, 0.5)
    with pytest.raises(ValueError):
        basis.evaluate(0, 0.5)


def test_small_pivot_raises(monkeypatch):
    monkeypatch.setattr(time_basis, 'PIVOT_TOL', 1.5)
    with pytest.raises(BasisError) as excinfo:
        build_basis(3, TimePartition(1.0, 10))
    assert excinfo.value.index == 1


if __name__ == "__main__":
    pytest.main([__file__])
