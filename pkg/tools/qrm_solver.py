"""
Quasi-reversibility solver for the coupled elliptic system of time Fourier
coefficients.

Unknowns are stored as one flat vector with u_n(x_i, y_j) at offset
p N + (n - 1), p = (i - 1)(N_x + 1) + (j - 1), so every operator is a
Kronecker product of a spatial matrix with an N x N block. The minimized
functional is

    d_x^2 |L U - source|^2 + eps d_x^2 |U|^2
        + w_grad d_x^2 (|Dx U|^2 + |Dy U|^2) + d_x |N U - G_tilde|^2

over interior rows, with the boundary values of U fixed to F_tilde.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import lsqr, splu

from config import GRADIENT_WEIGHTS, SOLVERS
from models.errors import SolverError
from models.fields import CoefficientField, IndirectData
from models.grid import NodeSets, SpatialGrid, classify_nodes
from models.results import QrmSolution

logger = logging.getLogger(__name__)

BLOCKS = ('equation', 'regularization', 'gradient_x', 'gradient_y', 'neumann')
DIRECT_ORDERING = 'MMD_AT_PLUS_A'


def _selection(rows: np.ndarray, grid: SpatialGrid) -> sparse.csr_matrix:
    """0/1 matrix picking the lattice nodes ``rows`` (1-based (i, j) pairs)."""
    cols = (rows[:, 0] - 1) * grid.n_side + (rows[:, 1] - 1)
    data = np.ones(len(rows))
    return sparse.csr_matrix((data, (np.arange(len(rows)), cols)), shape=(len(rows), grid.n_nodes))


def _second_difference(n: int) -> sparse.csr_matrix:
    v = np.ones(n)
    return sparse.diags([v[:-1], -2.0 * v, v[:-1]], [-1, 0, 1], format='csr')


def _forward_difference(n: int) -> sparse.csr_matrix:
    v = np.ones(n)
    return sparse.diags([-v, v[:-1]], [0, 1], format='csr')


def neumann_stencil(nodes: NodeSets) -> sparse.csr_matrix:
    """Rows (3u_b - 4u_{b-nu} + u_{b-2nu}) / (2 d_x) for the non-corner boundary nodes."""
    grid = nodes.grid
    i = nodes.neumann[:, 0] - 1
    j = nodes.neumann[:, 1] - 1
    di, dj = nodes.normals[:, 0], nodes.normals[:, 1]
    rows = np.repeat(np.arange(len(i)), 3)
    cols = np.column_stack([
        i * grid.n_side + j,
        (i - di) * grid.n_side + (j - dj),
        (i - 2 * di) * grid.n_side + (j - 2 * dj),
    ]).ravel()
    data = np.tile([3.0, -4.0, 1.0], len(i)) / (2.0 * grid.d_x)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(i), grid.n_nodes))


@dataclass(frozen=True, eq=False)
class CoefficientSystem:
    """Unweighted operators of the coupled system over the full unknown vector.

    ``L_op``, ``Dx_op``, ``Dy_op`` and ``reg_op`` have one row per
    (interior node, n); ``neumann_op`` one row per (non-corner boundary
    node, n). ``weights`` holds the squared-norm weight of each block.
    """

    nodes: NodeSets
    N: int
    S: np.ndarray
    epsilon: float
    L_op: sparse.csr_matrix
    Dx_op: sparse.csr_matrix
    Dy_op: sparse.csr_matrix
    reg_op: sparse.csr_matrix
    neumann_op: sparse.csr_matrix
    weights: Dict[str, float]

    @property
    def grid(self) -> SpatialGrid:
        return self.nodes.grid

    @property
    def size(self) -> int:
        return self.grid.n_nodes * self.N

    def operator(self, block: str) -> sparse.csr_matrix:
        return {
            'equation': self.L_op,
            'regularization': self.reg_op,
            'gradient_x': self.Dx_op,
            'gradient_y': self.Dy_op,
            'neumann': self.neumann_op,
        }[block]

    def node_offsets(self, rows: np.ndarray) -> np.ndarray:
        """Flat 0-based offsets of all N components at the given nodes, node-major."""
        p = (rows[:, 0] - 1) * self.grid.n_side + (rows[:, 1] - 1)
        return (p[:, None] * self.N + np.arange(self.N)[None, :]).ravel()


def assemble(grid: SpatialGrid, c: CoefficientField, S: np.ndarray, eps: float,
             gradient_weight: str = 'eps_squared', nodes: Optional[NodeSets] = None) -> CoefficientSystem:
    """
    Build the sparse operators of the quasi-reversibility functional.

    Row (i, j, m) of ``L_op`` is
    (u_m(i+1,j) + u_m(i-1,j) + u_m(i,j+1) + u_m(i,j-1) - 4u_m(i,j))/d_x^2
    + c(i,j) u_m(i,j) - sum_n s_mn u_n(i,j).

    Args:
        grid: Measurement grid
        c: Coefficient sampled on ``grid``
        S: N x N coupling matrix
        eps: Regularization parameter
        gradient_weight: 'eps_squared' (weight eps^2 on the gradient terms) or 'eps'
        nodes: Node sets of ``grid`` (computed when omitted)

    Returns:
        CoefficientSystem

    Raises:
        ValueError: On a non-positive eps or mismatched shapes
    """
    if not eps > 0:
        raise ValueError(f"Regularization parameter must be positive, got {eps}")
    if gradient_weight not in GRADIENT_WEIGHTS:
        raise ValueError(f"gradient_weight must be one of {GRADIENT_WEIGHTS}, got {gradient_weight!r}")
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape[0] != S.shape[1]:
        raise ValueError(f"Coupling matrix must be square, got {S.shape}")
    if c.grid != grid:
        raise ValueError("Coefficient field must be sampled on the measurement grid")

    started = time.perf_counter()
    nodes = nodes or classify_nodes(grid)
    N = S.shape[0]
    side = grid.n_side
    I_side = sparse.identity(side, format='csr')
    I_N = sparse.identity(N, format='csr')

    P_int = _selection(nodes.interior, grid)
    laplacian = (sparse.kron(_second_difference(side), I_side) + sparse.kron(I_side, _second_difference(side))) / grid.d_x ** 2
    spatial = P_int @ (laplacian + sparse.diags(c.values.ravel()))

    L_op = (sparse.kron(spatial, I_N) - sparse.kron(P_int, sparse.csr_matrix(S))).tocsr()
    Dx_op = sparse.kron(P_int @ sparse.kron(_forward_difference(side), I_side) / grid.d_x, I_N).tocsr()
    Dy_op = sparse.kron(P_int @ sparse.kron(I_side, _forward_difference(side)) / grid.d_x, I_N).tocsr()
    reg_op = sparse.kron(P_int, I_N).tocsr()
    neumann_op = sparse.kron(neumann_stencil(nodes), I_N).tocsr()
    # kron may go through BSR blocks that store explicit zeros
    for op in (L_op, Dx_op, Dy_op, reg_op, neumann_op):
        op.eliminate_zeros()

    gradient = eps ** 2 if gradient_weight == 'eps_squared' else eps
    area = grid.d_x ** 2
    weights = {
        'equation': area,
        'regularization': eps * area,
        'gradient_x': gradient * area,
        'gradient_y': gradient * area,
        'neumann': grid.d_x,
    }

    logger.debug(
        f"Assembled QRM operators: {L_op.shape[0]} equation rows, nnz(L)={L_op.nnz}, "
        f"{neumann_op.shape[0]} Neumann rows in {time.perf_counter() - started:.2f}s"
    )
    return CoefficientSystem(nodes, N, S, eps, L_op, Dx_op, Dy_op, reg_op, neumann_op, weights)


@dataclass(frozen=True, eq=False)
class ConstrainedSystem:
    """Weighted least-squares blocks over the free (interior) unknowns.

    ``blocks[name] = (A, b)`` already carries sqrt(weight) and the moved
    Dirichlet contributions, so the objective is sum ||A x - b||^2.
    """

    system: CoefficientSystem
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    blocks: Dict[str, Tuple[sparse.csr_matrix, np.ndarray]] = field(default_factory=dict)

    def stacked(self) -> Tuple[sparse.csr_matrix, np.ndarray]:
        matrices = [self.blocks[name][0] for name in BLOCKS]
        rhs = [self.blocks[name][1] for name in BLOCKS]
        return sparse.vstack(matrices, format='csr'), np.concatenate(rhs)

    def block_residuals(self, x_free: np.ndarray) -> Dict[str, float]:
        return {name: float(np.linalg.norm(A @ x_free - b)) for name, (A, b) in self.blocks.items()}

    def objective(self, x_free: np.ndarray) -> float:
        return float(sum(r ** 2 for r in self.block_residuals(x_free).values()))

    def full_vector(self, x_free: np.ndarray) -> np.ndarray:
        x = np.empty(self.system.size)
        x[self.free] = x_free
        x[self.fixed] = self.fixed_values
        return x


def apply_constraints(system: CoefficientSystem, data: IndirectData,
                      source: Optional[np.ndarray] = None) -> ConstrainedSystem:
    """
    Fix boundary unknowns to F_tilde and add the weighted Neumann rows.

    Args:
        system: Assembled operators
        data: Indirect boundary data on the same grid and order
        source: Optional right-hand side of the equation block, one entry per
            equation row (zero for the reconstruction problem)

    Returns:
        ConstrainedSystem over the interior unknowns

    Raises:
        ValueError: If the data dimensions don't match the system
    """
    nodes = system.nodes
    if data.N != system.N:
        raise ValueError(f"Indirect data has N={data.N}, system has N={system.N}")
    if data.F_tilde.shape[0] != len(nodes.boundary) or data.G_tilde.shape[0] != len(nodes.neumann):
        raise ValueError("Indirect data and system were built for different grids")
    if source is None:
        source = np.zeros(system.L_op.shape[0])
    elif source.shape != (system.L_op.shape[0],):
        raise ValueError(f"Source has shape {source.shape}, expected {(system.L_op.shape[0],)}")

    free = system.node_offsets(nodes.interior)
    fixed = system.node_offsets(nodes.boundary)
    fixed_values = data.F_tilde.ravel()

    targets = {
        'equation': source,
        'regularization': np.zeros(system.reg_op.shape[0]),
        'gradient_x': np.zeros(system.Dx_op.shape[0]),
        'gradient_y': np.zeros(system.Dy_op.shape[0]),
        'neumann': data.G_tilde.ravel(),
    }

    blocks = {}
    for name in BLOCKS:
        M = system.operator(name)
        scale = np.sqrt(system.weights[name])
        A = M[:, free]
        b = targets[name] - M[:, fixed] @ fixed_values
        blocks[name] = ((scale * A).tocsr(), scale * b)

    return ConstrainedSystem(system, free, fixed, fixed_values, blocks)


def solve(constrained: ConstrainedSystem, method: str = 'direct', tol: float = 1e-9,
          max_iterations: int = 20000) -> QrmSolution:
    """
    Minimize the weighted least-squares functional.

    'direct' factorizes the normal equations A^T A x = A^T b (SPD for
    eps > 0); 'iterative' runs LSQR on the stacked rectangular system.

    Args:
        constrained: System returned by ``apply_constraints``
        method: 'direct' or 'iterative'
        tol: LSQR stopping tolerance (atol = btol)
        max_iterations: LSQR iteration cap

    Returns:
        QrmSolution with the full coefficient field

    Raises:
        ValueError: On an unknown method
        SolverError: If LSQR stops at the iteration cap
    """
    if method not in SOLVERS:
        raise ValueError(f"Unknown solver {method!r}; choose from {SOLVERS}")

    A, b = constrained.stacked()
    started = time.perf_counter()
    if method == 'direct':
        normal = (A.T @ A).tocsc()
        # SPD: symmetric fill-reducing ordering with diagonal pivots
        lu = splu(normal, permc_spec=DIRECT_ORDERING, diag_pivot_thresh=0.0,
                  options=dict(SymmetricMode=True))
        x_free = lu.solve(A.T @ b)
        report = {
            'method': 'direct',
            'unknowns': A.shape[1],
            'rows': A.shape[0],
            'ordering': DIRECT_ORDERING,
            'nnz_normal': int(normal.nnz),
            'nnz_factor': int(lu.L.nnz + lu.U.nnz),
        }
        logger.info(
            f"Factorized {A.shape[1]} unknowns: {report['nnz_normal']} nonzeros in A^T A, "
            f"{report['nnz_factor']} in L + U"
        )
    else:
        x_free, istop, iterations, r1norm = lsqr(A, b, atol=tol, btol=tol, iter_lim=max_iterations)[:4]
        if istop == 7:
            raise SolverError("LSQR reached the iteration limit", residual=float(r1norm), iterations=int(iterations))
        report = {
            'method': 'iterative',
            'unknowns': A.shape[1],
            'rows': A.shape[0],
            'iterations': int(iterations),
            'stop_reason': int(istop),
        }
    logger.debug(f"QRM {method} solve of {A.shape[1]} unknowns took {time.perf_counter() - started:.2f}s")

    residuals = constrained.block_residuals(x_free)
    objective = float(sum(r ** 2 for r in residuals.values()))
    grid = constrained.system.grid
    U = constrained.full_vector(x_free).reshape(grid.n_side, grid.n_side, constrained.system.N)
    logger.info(f"QRM solved ({method}): objective {objective:.4e}")
    return QrmSolution(grid, U, residuals, report, objective)
