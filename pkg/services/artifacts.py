"""
CSV, manifest and Matrix Market writers for experiment outputs.

Every table goes through pandas with one fixed float format and '\\n' line
endings, so identical inputs give byte-identical files.
"""

import logging
import platform
from pathlib import Path
from typing import Dict, Iterable, List, Mapping

import numpy as np
import pandas as pd
import scipy
from scipy.io import mmwrite

from config import VERSION, ExperimentConfig
from models.fields import CauchyData, IndirectData
from models.grid import SpatialGrid, edge_of
from models.results import METRICS_COLUMNS, MetricsRow, TruncationReport
from tools.reconstruction import node_range
from tools.time_basis import TimeBasis

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.10g'


def _write(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def metrics_frame(rows: Iterable[MetricsRow]) -> pd.DataFrame:
    return pd.DataFrame([row.as_record() for row in rows], columns=METRICS_COLUMNS)


def write_metrics(rows: Iterable[MetricsRow], path) -> Path:
    """Metrics table with the fixed column order."""
    return _write(metrics_frame(rows), path)


def write_field(values: np.ndarray, grid: SpatialGrid, path) -> Path:
    """Nodal field as rows i,j,x,y,value (1-based i, j, row-major)."""
    values = np.asarray(values, dtype=float)
    I, J = np.meshgrid(np.arange(1, grid.n_side + 1), np.arange(1, grid.n_side + 1), indexing='ij')
    X, Y = grid.mesh()
    frame = pd.DataFrame({
        'i': I.ravel(),
        'j': J.ravel(),
        'x': X.ravel(),
        'y': Y.ravel(),
        'value': values.ravel(),
    })
    return _write(frame, path)


def write_cauchy(data: CauchyData, path) -> Path:
    """Traces as rows edge,i_or_j,t_k,F,G; G is empty at the corners."""
    nodes = data.nodes
    side = data.grid.n_side
    t = data.partition.t
    neumann_column = {(int(i), int(j)): q for q, (i, j) in enumerate(nodes.neumann)}

    records: List[Dict[str, object]] = []
    for b, (i, j) in enumerate(nodes.boundary):
        i, j = int(i), int(j)
        edge = edge_of(i, j, side)
        along = j if edge in ('left', 'right') else i
        q = neumann_column.get((i, j))
        for k, t_k in enumerate(t):
            records.append({
                'edge': edge,
                'i_or_j': along,
                't_k': t_k,
                'F': data.F[k, b],
                'G': data.G[k, q] if q is not None else np.nan,
            })
    return _write(pd.DataFrame(records, columns=['edge', 'i_or_j', 't_k', 'F', 'G']), path)


def write_indirect(data: IndirectData, path) -> Path:
    """Projected data as rows node,n,F_tilde,G_tilde (node = row-major number)."""
    grid = data.nodes.grid
    neumann_row = {(int(i), int(j)): q for q, (i, j) in enumerate(data.nodes.neumann)}
    records = []
    for b, (i, j) in enumerate(data.nodes.boundary):
        q = neumann_row.get((int(i), int(j)))
        node = int(grid.node_number(i, j))
        for n in range(data.N):
            records.append({
                'node': node,
                'n': n + 1,
                'F_tilde': data.F_tilde[b, n],
                'G_tilde': data.G_tilde[q, n] if q is not None else np.nan,
            })
    return _write(pd.DataFrame(records, columns=['node', 'n', 'F_tilde', 'G_tilde']), path)


def write_basis(basis: TimeBasis, path) -> Path:
    """Sampled basis with columns t, psi_1..psi_N."""
    frame = pd.DataFrame(basis.samples, columns=[f"psi_{n}" for n in range(1, basis.N + 1)])
    frame.insert(0, 't', basis.partition.t)
    return _write(frame, path)


def write_truncation(report: TruncationReport, out_dir) -> List[Path]:
    """Summary table plus one node-error field per truncation order."""
    out_dir = Path(out_dir)
    summary = pd.DataFrame(report.summary(), columns=['n_basis', 'rel_l2', 'max_rel'])
    paths = [_write(summary, out_dir / 'truncation.csv')]
    for entry in report.entries:
        paths.append(write_field(entry.node_error, report.grid, out_dir / f"truncation_error_N{entry.n_basis}.csv"))
    return paths


def write_node_range(report: TruncationReport, first: int, last: int, path) -> Path:
    """u(., 0) and every partial sum at row-major node numbers first..last."""
    numbers, u0 = node_range(report.u0, first, last)
    frame = pd.DataFrame({'node': numbers, 'u0': u0})
    for entry in report.entries:
        frame[f"partial_N{entry.n_basis}"] = node_range(entry.partial, first, last)[1]
    return _write(frame, path)


def write_matrix_market(matrix, path, comment: str = '') -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mmwrite(str(path), matrix, comment=comment, field='real', precision=17)
    logger.info(f"Wrote {matrix.shape[0]}x{matrix.shape[1]} matrix to {path}")
    return path


def versions() -> Dict[str, str]:
    return {
        'version.qrm': VERSION,
        'version.python': platform.python_version(),
        'version.numpy': np.__version__,
        'version.scipy': scipy.__version__,
        'version.pandas': pd.__version__,
    }


def write_manifest(path, config: ExperimentConfig, extra: Mapping[str, object]) -> Path:
    """
    Write the run manifest.

    The config keys come first in ``to_text`` form so the manifest is itself
    a config file; bookkeeping keys follow in sorted order.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [config.to_text().rstrip('\n')]
    for key in sorted(extra):
        lines.append(f"{key}={extra[key]}")
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


def read_manifest(path) -> Dict[str, str]:
    """Raw key=value pairs of a manifest."""
    values = {}
    for raw in Path(path).read_text(encoding='utf-8').splitlines():
        if '=' in raw and not raw.lstrip().startswith('#'):
            key, value = raw.split('=', 1)
            values[key.strip()] = value.strip()
    return values
