"""
Result types: the QRM minimizer, reconstructed fields and error metrics.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from models.grid import SpatialGrid

METRICS_COLUMNS = [
    'noise_level', 'max_true', 'max_comp', 'error_rel',
    'pos_true_x', 'pos_true_y', 'pos_comp_x', 'pos_comp_y',
    'dis_err', 'rel_l2',
]


@dataclass
class QrmSolution:
    """Minimizer U[i-1, j-1, n-1] with per-block residuals and solver statistics."""

    grid: SpatialGrid
    U: np.ndarray
    residual_norms: Dict[str, float]
    solver_report: Dict[str, object]
    objective: float

    @property
    def N(self) -> int:
        return self.U.shape[2]


@dataclass
class Reconstruction:
    """f_comp = u(., 0) synthesized from the coefficient field."""

    grid: SpatialGrid
    f_comp: np.ndarray
    u_slices: Dict[float, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class MetricsRow:
    noise_level: float
    max_true: float
    max_comp: float
    error_rel: float
    pos_true: Tuple[float, float]
    pos_comp: Tuple[float, float]
    dis_err: float
    rel_l2: float

    def as_record(self) -> Dict[str, float]:
        return {
            'noise_level': self.noise_level,
            'max_true': self.max_true,
            'max_comp': self.max_comp,
            'error_rel': self.error_rel,
            'pos_true_x': self.pos_true[0],
            'pos_true_y': self.pos_true[1],
            'pos_comp_x': self.pos_comp[0],
            'pos_comp_y': self.pos_comp[1],
            'dis_err': self.dis_err,
            'rel_l2': self.rel_l2,
        }


@dataclass
class TruncationEntry:
    n_basis: int
    rel_l2: float
    max_rel: float
    node_error: np.ndarray
    partial: np.ndarray


@dataclass
class TruncationReport:
    """Partial-sum quality of u(., 0) for several truncation orders."""

    grid: SpatialGrid
    entries: List[TruncationEntry]
    u0: np.ndarray

    def summary(self) -> List[Dict[str, float]]:
        return [
            {'n_basis': e.n_basis, 'rel_l2': e.rel_l2, 'max_rel': e.max_rel}
            for e in self.entries
        ]
