"""
Field and boundary-data containers shared by the solvers.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from models.grid import NodeSets, SpatialGrid, TimePartition


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Zero-order coefficient c sampled on a grid, values[i-1, j-1]."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        shape = (self.grid.n_side, self.grid.n_side)
        if self.values.shape != shape:
            raise ValueError(f"Coefficient field has shape {self.values.shape}, expected {shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Coefficient field must be finite everywhere")

    @classmethod
    def from_function(cls, grid: SpatialGrid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> 'CoefficientField':
        X, Y = grid.mesh()
        return cls(grid, np.asarray(func(X, Y), dtype=float))

    @classmethod
    def zeros(cls, grid: SpatialGrid) -> 'CoefficientField':
        return cls(grid, np.zeros((grid.n_side, grid.n_side)))


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Solution samples values[k, i-1, j-1] = u(x_i, y_j, t_{k+1})."""

    grid: SpatialGrid
    partition: TimePartition
    values: np.ndarray

    def __post_init__(self):
        shape = (self.partition.n_times, self.grid.n_side, self.grid.n_side)
        if self.values.shape != shape:
            raise ValueError(f"Field has shape {self.values.shape}, expected {shape}")

    def restrict(self, grid: SpatialGrid) -> 'SpaceTimeField':
        """Sub-field on an aligned, centred grid with the same mesh step."""
        offset = aligned_offset(self.grid, grid)
        stop = offset + grid.n_side
        return SpaceTimeField(grid, self.partition, self.values[:, offset:stop, offset:stop])


def aligned_offset(outer: SpatialGrid, inner: SpatialGrid) -> int:
    """Index shift of ``inner`` inside ``outer``; rejects misaligned grids."""
    if not np.isclose(outer.d_x, inner.d_x, rtol=1e-12, atol=0.0):
        raise ValueError(f"Grids are misaligned: mesh steps {outer.d_x} and {inner.d_x}")
    if inner.R > outer.R + 1e-12 * outer.R:
        raise ValueError(f"Measurement square R={inner.R} exceeds the solve domain R={outer.R}")
    shift = (outer.R - inner.R) / outer.d_x
    offset = int(round(shift))
    if abs(shift - offset) > 1e-8:
        raise ValueError(f"Grids are misaligned: measurement nodes fall {shift:.6f} cells from solve nodes")
    return offset


@dataclass(frozen=True, eq=False)
class CauchyData:
    """Lateral Cauchy data on the boundary of the measurement grid.

    F[k, b] is the Dirichlet trace at ``nodes.boundary[b]``; G[k, q] the
    outward normal derivative at ``nodes.neumann[q]`` (corners excluded).
    """

    nodes: NodeSets
    partition: TimePartition
    F: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        n_t = self.partition.n_times
        if self.F.shape != (n_t, len(self.nodes.boundary)):
            raise ValueError(f"F has shape {self.F.shape}, expected {(n_t, len(self.nodes.boundary))}")
        if self.G.shape != (n_t, len(self.nodes.neumann)):
            raise ValueError(f"G has shape {self.G.shape}, expected {(n_t, len(self.nodes.neumann))}")

    @property
    def grid(self) -> SpatialGrid:
        return self.nodes.grid


@dataclass(frozen=True, eq=False)
class IndirectData:
    """Time-projected boundary data: F_tilde[b, n-1], G_tilde[q, n-1]."""

    nodes: NodeSets
    F_tilde: np.ndarray
    G_tilde: np.ndarray

    def __post_init__(self):
        if self.F_tilde.ndim != 2 or self.G_tilde.ndim != 2:
            raise ValueError("Indirect data must be 2-D (node, order) arrays")
        if self.F_tilde.shape[0] != len(self.nodes.boundary):
            raise ValueError(f"F_tilde has {self.F_tilde.shape[0]} rows, expected {len(self.nodes.boundary)}")
        if self.G_tilde.shape[0] != len(self.nodes.neumann):
            raise ValueError(f"G_tilde has {self.G_tilde.shape[0]} rows, expected {len(self.nodes.neumann)}")
        if self.F_tilde.shape[1] != self.G_tilde.shape[1]:
            raise ValueError("F_tilde and G_tilde disagree on the truncation order")
        if not (np.all(np.isfinite(self.F_tilde)) and np.all(np.isfinite(self.G_tilde))):
            raise ValueError("Indirect data must be finite")

    @property
    def N(self) -> int:
        return self.F_tilde.shape[1]
