"""
Spatial grid, time partition and the flattened unknown index.

Indices i, j (space) and n (basis order) are 1-based everywhere in the public
API so that the assembled operators read like their formulas. Arrays store
node (i, j) at ``[i - 1, j - 1]``; ``FlatIndex.offset`` is the single place
where the 1-based flat index is turned into a 0-based array position.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np

IntOrArray = Union[int, np.ndarray]

# Outward normals of the four edges, as (di, dj) steps in the index lattice
EDGE_NORMALS = {
    'left': (-1, 0),
    'right': (1, 0),
    'bottom': (0, -1),
    'top': (0, 1),
}


@dataclass(frozen=True)
class SpatialGrid:
    """Square lattice on (-R, R)^2 with N_x subdivisions per axis."""

    R: float
    N_x: int

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if int(self.N_x) != self.N_x or self.N_x < 2:
            raise ValueError(f"N_x must be an integer >= 2, got {self.N_x}")

    @property
    def d_x(self) -> float:
        return 2.0 * self.R / self.N_x

    @property
    def n_side(self) -> int:
        """Nodes per axis."""
        return self.N_x + 1

    @property
    def n_nodes(self) -> int:
        return self.n_side ** 2

    @cached_property
    def x(self) -> np.ndarray:
        # linspace reproduces both endpoints exactly
        return np.linspace(-self.R, self.R, self.n_side)

    @property
    def y(self) -> np.ndarray:
        return self.x

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays X[i-1, j-1] = x_i, Y[i-1, j-1] = y_j."""
        return np.meshgrid(self.x, self.y, indexing='ij')

    def node_number(self, i: IntOrArray, j: IntOrArray) -> IntOrArray:
        """Row-major 1-based node number, (i - 1)(N_x + 1) + j."""
        return (np.asarray(i) - 1) * self.n_side + np.asarray(j)


def build_grid(R: float, N_x: int) -> SpatialGrid:
    """Build the measurement grid; rejects N_x < 2 and non-positive R."""
    return SpatialGrid(float(R), int(N_x))


@dataclass(frozen=True)
class TimePartition:
    """Uniform partition 0 = t_1 < ... < t_{N_T+1} = T."""

    T: float
    N_T: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if int(self.N_T) != self.N_T or self.N_T < 1:
            raise ValueError(f"N_T must be a positive integer, got {self.N_T}")

    @property
    def d_t(self) -> float:
        return self.T / self.N_T

    @property
    def n_times(self) -> int:
        return self.N_T + 1

    @cached_property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_times)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_times, self.d_t)
        w[0] = w[-1] = 0.5 * self.d_t
        return w


@dataclass(frozen=True)
class FlatIndex:
    """Map (i, j, n) -> (i - 1)(N_x + 1)N + (j - 1)N + n and back."""

    N_x: int
    N: int

    @property
    def size(self) -> int:
        return (self.N_x + 1) ** 2 * self.N

    def _check(self, i, j, n):
        i, j, n = np.asarray(i), np.asarray(j), np.asarray(n)
        side = self.N_x + 1
        if np.any((i < 1) | (i > side) | (j < 1) | (j > side) | (n < 1) | (n > self.N)):
            raise ValueError(f"Index out of range for N_x={self.N_x}, N={self.N}: ({i}, {j}, {n})")

    def flatten(self, i: IntOrArray, j: IntOrArray, n: IntOrArray) -> IntOrArray:
        self._check(i, j, n)
        side = self.N_x + 1
        flat = (np.asarray(i) - 1) * side * self.N + (np.asarray(j) - 1) * self.N + np.asarray(n)
        return int(flat) if np.ndim(flat) == 0 else flat

    def unflatten(self, flat: IntOrArray) -> Tuple[IntOrArray, IntOrArray, IntOrArray]:
        flat = np.asarray(flat)
        if np.any((flat < 1) | (flat > self.size)):
            raise ValueError(f"Flat index out of range [1, {self.size}]: {flat}")
        rest, n0 = np.divmod(flat - 1, self.N)
        i0, j0 = np.divmod(rest, self.N_x + 1)
        result = (i0 + 1, j0 + 1, n0 + 1)
        if flat.ndim == 0:
            return tuple(int(v) for v in result)
        return result

    def offset(self, i: IntOrArray, j: IntOrArray, n: IntOrArray) -> IntOrArray:
        """0-based position in the stored vector."""
        return self.flatten(i, j, n) - 1


def flatten(i: int, j: int, n: int, N_x: int, N: int) -> int:
    return FlatIndex(N_x, N).flatten(i, j, n)


def unflatten(flat: int, N_x: int, N: int) -> Tuple[int, int, int]:
    return FlatIndex(N_x, N).unflatten(flat)


@dataclass(frozen=True, eq=False)
class NodeSets:
    """Interior, boundary and first-interior-layer nodes of a grid.

    Every set is an (k, 2) integer array of 1-based (i, j) pairs in row-major
    order. ``neumann`` lists the non-corner boundary nodes with the outward
    normal of their edge in ``normals`` and the edge name in ``edges``.
    """

    grid: SpatialGrid
    interior: np.ndarray
    boundary: np.ndarray
    first_layer: np.ndarray
    neumann: np.ndarray
    normals: np.ndarray
    edges: Tuple[str, ...]

    @property
    def interior_mask(self) -> np.ndarray:
        mask = np.zeros((self.grid.n_side, self.grid.n_side), dtype=bool)
        mask[self.interior[:, 0] - 1, self.interior[:, 1] - 1] = True
        return mask

    @property
    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask


def edge_of(i: int, j: int, side: int) -> str:
    if i == 1:
        return 'left'
    if i == side:
        return 'right'
    if j == 1:
        return 'bottom'
    return 'top'


def classify_nodes(grid: SpatialGrid) -> NodeSets:
    """Split the lattice into interior and boundary nodes.

    Corners belong to the boundary but carry no Neumann row.
    """
    side = grid.n_side
    I, J = np.meshgrid(np.arange(1, side + 1), np.arange(1, side + 1), indexing='ij')
    I, J = I.ravel(), J.ravel()

    on_boundary = (I == 1) | (I == side) | (J == 1) | (J == side)
    interior = np.column_stack([I[~on_boundary], J[~on_boundary]])
    boundary = np.column_stack([I[on_boundary], J[on_boundary]])

    near = (I == 2) | (I == side - 1) | (J == 2) | (J == side - 1)
    first_layer = np.column_stack([I[~on_boundary & near], J[~on_boundary & near]])

    corner = ((I == 1) | (I == side)) & ((J == 1) | (J == side))
    side_nodes = on_boundary & ~corner
    neumann = np.column_stack([I[side_nodes], J[side_nodes]])
    edges = tuple(edge_of(i, j, side) for i, j in neumann)
    normals = np.array([EDGE_NORMALS[e] for e in edges], dtype=int).reshape(-1, 2)

    return NodeSets(grid, interior, boundary, first_layer, neumann, normals, edges)
