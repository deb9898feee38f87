"""
Forward problem u_t = Laplace(u) + c u, u(., 0) = f, and its lateral Cauchy traces.

The equation is posed on the whole plane; it is solved on an extended square
with homogeneous Dirichlet values at its outer boundary and the traces are
read off on the measurement square inside it.
"""

import logging
import time
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu
from tqdm import tqdm

from models.errors import ForwardSolveError
from models.fields import CauchyData, CoefficientField, SpaceTimeField, aligned_offset
from models.grid import NodeSets, SpatialGrid, TimePartition, classify_nodes

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
FREE_SPACE_CLEARANCE = 2


def peaks_coefficient(x, y):
    """The scaled 'peaks' surface used as the coefficient c(x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (
        3.0 * (1.0 - x) ** 2 * np.exp(-x ** 2 - (y + 1.0) ** 2)
        - 10.0 * (x / 5.0 - x ** 3 - y ** 5) * np.exp(-x ** 2 - y ** 2)
        - np.exp(-(x + 1.0) ** 2 - y ** 2) / 3.0
    ) / 10.0


def extended_grid(grid: SpatialGrid, inverse_crime: bool = False) -> SpatialGrid:
    """Solve domain for the forward problem.

    Half the measurement width is added on every side with the same mesh
    step, giving (-2R, 2R)^2 for even N_x. ``inverse_crime`` returns the
    measurement grid itself.
    """
    if inverse_crime:
        return grid
    pad = grid.N_x // 2
    return SpatialGrid(grid.R + pad * grid.d_x, grid.N_x + 2 * pad)


def laplacian_1d(n: int) -> sparse.spmatrix:
    """Second difference on n nodes with zero Dirichlet neighbours, unscaled."""
    v = np.ones(n)
    return sparse.diags([v[:-1], -2.0 * v, v[:-1]], [-1, 0, 1], format='csr')


def dirichlet_laplacian(grid: SpatialGrid) -> sparse.csr_matrix:
    """5-point Laplacian on the interior nodes, row-major (i outer)."""
    m = grid.N_x - 1
    L1 = laplacian_1d(m)
    I1 = sparse.identity(m, format='csr')
    return ((sparse.kron(L1, I1) + sparse.kron(I1, L1)) / grid.d_x ** 2).tocsr()


class ForwardSolver:
    """Backward Euler time stepping with one sparse LU factorization."""

    def __init__(self, grid: SpatialGrid, c: CoefficientField, partition: TimePartition, progress: bool = False):
        """
        Factorize (Id - d_t(Laplace_h + c)) on the interior nodes of ``grid``.

        Args:
            grid: Solve grid (homogeneous Dirichlet on its boundary)
            c: Coefficient sampled on ``grid``
            partition: Time partition
            progress: Show a tqdm progress bar while stepping
        """
        if c.grid != grid:
            raise ValueError("Coefficient field must be sampled on the solve grid")
        self.grid = grid
        self.partition = partition
        self.progress = progress

        c_interior = c.values[1:-1, 1:-1].ravel()
        n = c_interior.size
        operator = dirichlet_laplacian(grid) + sparse.diags(c_interior)
        self.matrix = (sparse.identity(n, format='csr') - partition.d_t * operator).tocsc()

        started = time.perf_counter()
        self._lu = splu(self.matrix)
        logger.debug(
            f"Factorized forward matrix n={n} nnz={self.matrix.nnz} "
            f"in {time.perf_counter() - started:.2f}s"
        )

    def solve(self, f: np.ndarray, enforce_free_space: bool = True) -> SpaceTimeField:
        """
        March u^{k+1} = (Id - d_t(Laplace_h + c))^{-1} u^k from u^1 = f.

        Args:
            f: Initial field on the solve grid, f[i-1, j-1]
            enforce_free_space: Reject f that is nonzero near the outer boundary

        Returns:
            SpaceTimeField on the solve grid; values[0] is f itself

        Raises:
            ValueError: If f has the wrong shape or violates the clearance
            ForwardSolveError: If a step misses the residual tolerance
        """
        side = self.grid.n_side
        f = np.asarray(f, dtype=float)
        if f.shape != (side, side):
            raise ValueError(f"Initial field has shape {f.shape}, expected {(side, side)}")
        if enforce_free_space:
            inner = slice(FREE_SPACE_CLEARANCE + 1, -(FREE_SPACE_CLEARANCE + 1))
            rim = np.ones_like(f, dtype=bool)
            rim[inner, inner] = False
            if np.any(f[rim] != 0.0):
                raise ValueError(
                    f"Initial field is nonzero within {FREE_SPACE_CLEARANCE} cells of the solve boundary"
                )

        values = np.zeros((self.partition.n_times, side, side))
        values[0] = f
        u = f[1:-1, 1:-1].ravel().copy()

        steps = range(1, self.partition.n_times)
        for k in tqdm(steps, desc='forward', disable=not self.progress, leave=False):
            rhs = u
            u = self._lu.solve(rhs)
            rhs_norm = np.linalg.norm(rhs)
            if rhs_norm > 0.0:
                residual = np.linalg.norm(self.matrix @ u - rhs) / rhs_norm
                if residual > RESIDUAL_TOL:
                    raise ForwardSolveError(k, residual)
            values[k, 1:-1, 1:-1] = u.reshape(side - 2, side - 2)

        logger.info(f"Forward solve done: {self.partition.N_T} steps on {side}x{side} nodes")
        return SpaceTimeField(self.grid, self.partition, values)


def solve_forward(grid_ext: SpatialGrid, c: CoefficientField, f: np.ndarray, partition: TimePartition,
                  enforce_free_space: bool = True, progress: bool = False) -> SpaceTimeField:
    """One-shot forward solve; see ``ForwardSolver``."""
    return ForwardSolver(grid_ext, c, partition, progress=progress).solve(f, enforce_free_space)


def normal_derivative(values: np.ndarray, nodes: NodeSets, offset: int, d_x: float) -> np.ndarray:
    """
    Second-order one-sided outward derivative at the non-corner boundary nodes.

    G = (3u_b - 4u_{b-nu} + u_{b-2nu}) / (2 d_x), evaluated on
    ``values[..., i-1+offset, j-1+offset]``.

    Returns:
        Array with the leading shape of ``values`` and one column per Neumann node
    """
    i = nodes.neumann[:, 0] - 1 + offset
    j = nodes.neumann[:, 1] - 1 + offset
    di, dj = nodes.normals[:, 0], nodes.normals[:, 1]
    u0 = values[..., i, j]
    u1 = values[..., i - di, j - dj]
    u2 = values[..., i - 2 * di, j - 2 * dj]
    return (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * d_x)


def extract_cauchy(field: SpaceTimeField, measurement_grid: SpatialGrid,
                   nodes: Optional[NodeSets] = None) -> CauchyData:
    """
    Dirichlet and Neumann traces of a field on the measurement boundary.

    Args:
        field: Forward solution on the solve grid
        measurement_grid: Grid of the measurement square, aligned with the solve grid
        nodes: Node sets of ``measurement_grid`` (computed when omitted)

    Returns:
        CauchyData sampled on the field's partition

    Raises:
        ValueError: If the grids are misaligned
    """
    offset = aligned_offset(field.grid, measurement_grid)
    nodes = nodes or classify_nodes(measurement_grid)
    bi = nodes.boundary[:, 0] - 1 + offset
    bj = nodes.boundary[:, 1] - 1 + offset
    F = field.values[:, bi, bj]
    G = normal_derivative(field.values, nodes, offset, measurement_grid.d_x)
    return CauchyData(nodes, field.partition, F, G)
