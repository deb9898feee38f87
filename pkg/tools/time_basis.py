"""
Orthonormal time basis built from (t - t0)^(n-1) exp(t - t0).

Each basis function is stored as a polynomial times exp(t - t0). The
polynomial part is kept as a Legendre series in sigma = (t - t0)/t0, which
spans the same space as the monomials of the shifted variable but stays well
conditioned up to N = 30 and beyond; ``coeffs`` converts to monomial
coefficients of (t - t0) on request.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.polynomial import legendre

from models.errors import BasisError
from models.grid import TimePartition

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


def quadrature_weights(partition: TimePartition, inner_product: str = 'trapezoid') -> np.ndarray:
    """Weights of the discrete inner product <f, g> = sum_k w_k f(t_k) g(t_k)."""
    if inner_product == 'trapezoid':
        return partition.trapezoid_weights()
    if inner_product == 'euclidean':
        return np.ones(partition.n_times)
    raise ValueError(f"Unknown inner product {inner_product!r}")


@dataclass(frozen=True, eq=False)
class TimeBasis:
    """Psi_1..Psi_N with samples and analytic derivative samples on a partition.

    ``legendre_coeffs[:, n-1]`` holds the Legendre series of the polynomial
    part of Psi_n; ``deriv_coeffs`` the same for Psi_n'. ``samples[k, n-1]``
    is Psi_n(t_{k+1}).
    """

    N: int
    partition: TimePartition
    t0: float
    weights: np.ndarray
    legendre_coeffs: np.ndarray
    deriv_coeffs: np.ndarray
    samples: np.ndarray
    deriv_samples: np.ndarray
    inner_product: str = 'trapezoid'

    @property
    def coeffs(self) -> np.ndarray:
        """Monomial coefficients c[n-1, k] with Psi_n(t) = sum_k c[n-1, k](t - t0)^k exp(t - t0)."""
        out = np.zeros((self.N, self.N))
        scale = self.t0 ** -np.arange(self.N, dtype=float)
        for n in range(self.N):
            mono = legendre.leg2poly(self.legendre_coeffs[:, n])
            out[n, :len(mono)] = mono * scale[:len(mono)]
        return out

    def _check_order(self, n: int):
        if not 1 <= n <= self.N:
            raise ValueError(f"Basis index must be in [1, {self.N}], got {n}")

    def evaluate(self, n: int, t: ArrayLike, derivative: bool = False) -> ArrayLike:
        """
        Evaluate Psi_n (or Psi_n') from its coefficients.

        Args:
            n: 1-based basis index
            t: Time or array of times
            derivative: Return Psi_n' instead of Psi_n

        Returns:
            Value(s) with the shape of ``t``
        """
        self._check_order(n)
        t = np.asarray(t, dtype=float)
        s = t - self.t0
        coeffs = self.deriv_coeffs if derivative else self.legendre_coeffs
        value = legendre.legval(s / self.t0, coeffs[:, n - 1]) * np.exp(s)
        return float(value) if value.ndim == 0 else value

    def evaluate_all(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """(Psi_1(t)..Psi_N(t), Psi_1'(t)..Psi_N'(t))."""
        s = float(t) - self.t0
        row = legendre.legvander(np.array([s / self.t0]), self.N - 1)[0] * np.exp(s)
        return row @ self.legendre_coeffs, row @ self.deriv_coeffs

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        return float(np.sum(self.weights * f * g))

    def gram(self) -> np.ndarray:
        return self.samples.T @ (self.weights[:, None] * self.samples)

    def project(self, values: np.ndarray, n_terms: int = None) -> np.ndarray:
        """
        Fourier coefficients in time of samples along axis 0.

        Args:
            values: Array of shape (N_T + 1, ...)
            n_terms: Keep only Psi_1..Psi_{n_terms} (default: all N)

        Returns:
            Array of shape (n_terms, ...)
        """
        values = np.asarray(values, dtype=float)
        if values.shape[0] != self.partition.n_times:
            raise ValueError(
                f"Samples have {values.shape[0]} time levels, basis partition has {self.partition.n_times}"
            )
        n_terms = self.N if n_terms is None else n_terms
        self._check_order(n_terms)
        weighted = self.weights[:, None] * self.samples[:, :n_terms]
        flat = values.reshape(values.shape[0], -1)
        return (weighted.T @ flat).reshape((n_terms,) + values.shape[1:])


def _weighted_vandermonde(N: int, partition: TimePartition, t0: float) -> np.ndarray:
    s = partition.t - t0
    return legendre.legvander(s / t0, N - 1) * np.exp(s)[:, None]


def build_basis(N: int, partition: TimePartition, inner_product: str = 'trapezoid') -> TimeBasis:
    """
    Gram-Schmidt the family (t - t0)^(n-1) exp(t - t0), n = 1..N.

    Classical Gram-Schmidt with one reorthogonalization pass, run on the
    weighted samples while the same operations are applied to the coefficient
    vectors. Each Psi_n keeps a positive leading coefficient.

    Args:
        N: Truncation order
        partition: Time partition the basis is sampled on
        inner_product: 'trapezoid' (default) or 'euclidean'

    Returns:
        TimeBasis

    Raises:
        ValueError: If N is not in [1, N_T]
        BasisError: If a pivot norm drops below the tolerance
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if N > partition.N_T:
        raise ValueError(f"N={N} exceeds N_T={partition.N_T}; the samples cannot be independent")

    t0 = partition.T / 2.0
    weights = quadrature_weights(partition, inner_product)
    V = _weighted_vandermonde(N, partition, t0)
    A = np.sqrt(weights)[:, None] * V

    Q = np.zeros_like(A)
    C = np.zeros((N, N))
    for j in range(N):
        v = A[:, j].copy()
        c = np.zeros(N)
        c[j] = 1.0
        reference = np.linalg.norm(v)
        for _ in range(2):
            h = Q[:, :j].T @ v
            v -= Q[:, :j] @ h
            c -= C[:, :j] @ h
        pivot = np.linalg.norm(v)
        logger.debug(f"Gram-Schmidt pivot {j + 1}: {pivot / reference:.3e}")
        if pivot < PIVOT_TOL * reference:
            raise BasisError(j + 1, pivot / reference)
        Q[:, j] = v / pivot
        C[:, j] = c / pivot

    # d/dt [p(sigma) e^s] = (p(sigma) + p'(sigma)/t0) e^s
    D = C.copy()
    for n in range(N):
        der = legendre.legder(C[:, n]) / t0
        D[:len(der), n] += der

    basis = TimeBasis(
        N=N,
        partition=partition,
        t0=t0,
        weights=weights,
        legendre_coeffs=C,
        deriv_coeffs=D,
        samples=V @ C,
        deriv_samples=V @ D,
        inner_product=inner_product,
    )
    logger.info(f"Built time basis N={N} on N_T={partition.N_T} ({inner_product} inner product)")
    return basis


def coupling_matrix(basis: TimeBasis) -> np.ndarray:
    """s_mn = <Psi_m, Psi_n'> with the basis' own quadrature weights."""
    return basis.samples.T @ (basis.weights[:, None] * basis.deriv_samples)


def evaluate(basis: TimeBasis, n: int, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """(Psi_n(t), Psi_n'(t))."""
    return basis.evaluate(n, t), basis.evaluate(n, t, derivative=True)
