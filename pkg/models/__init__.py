"""
Models module for the QRM reconstruction toolkit.
"""

from .grid import (
    EDGE_NORMALS, FlatIndex, NodeSets, SpatialGrid, TimePartition,
    build_grid, classify_nodes, edge_of, flatten, unflatten,
)
from .fields import CauchyData, CoefficientField, IndirectData, SpaceTimeField, aligned_offset
from .results import (
    METRICS_COLUMNS, MetricsRow, QrmSolution, Reconstruction,
    TruncationEntry, TruncationReport,
)
from .errors import BasisError, ForwardSolveError, QrmError, SolverError, StageError

__all__ = [
    'EDGE_NORMALS', 'FlatIndex', 'NodeSets', 'SpatialGrid', 'TimePartition',
    'build_grid', 'classify_nodes', 'edge_of', 'flatten', 'unflatten',
    'CauchyData', 'CoefficientField', 'IndirectData', 'SpaceTimeField', 'aligned_offset',
    'METRICS_COLUMNS', 'MetricsRow', 'QrmSolution', 'Reconstruction',
    'TruncationEntry', 'TruncationReport',
    'BasisError', 'ForwardSolveError', 'QrmError', 'SolverError', 'StageError',
]
