"""
Synthesis of u(x, t) from the coefficient field, error metrics and
truncation diagnostics.
"""

import logging
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from models.fields import SpaceTimeField
from models.grid import SpatialGrid
from models.results import MetricsRow, QrmSolution, Reconstruction, TruncationEntry, TruncationReport
from tools.sources import SourceSpec
from tools.time_basis import TimeBasis

logger = logging.getLogger(__name__)


def synthesize(U: Union[QrmSolution, np.ndarray], basis: TimeBasis, t: float) -> np.ndarray:
    """u(x, t) = sum_n U_n(x) Psi_n(t), with Psi_n evaluated analytically."""
    if isinstance(U, QrmSolution):
        U = U.U
    U = np.asarray(U, dtype=float)
    if U.shape[-1] != basis.N:
        raise ValueError(f"Coefficient field has {U.shape[-1]} components, basis has N={basis.N}")
    if not 0.0 <= t <= basis.partition.T:
        raise ValueError(f"t={t} lies outside [0, {basis.partition.T}]")
    psi, _ = basis.evaluate_all(t)
    return U @ psi


def reconstruct(solution: QrmSolution, basis: TimeBasis, times: Iterable[float] = ()) -> Reconstruction:
    """f_comp = u(., 0), plus optional slices at other times."""
    f_comp = synthesize(solution, basis, 0.0)
    slices = {float(t): synthesize(solution, basis, float(t)) for t in times}
    return Reconstruction(solution.grid, f_comp, slices)


def _regions(grid: SpatialGrid, spec: SourceSpec) -> List[np.ndarray]:
    X, _ = grid.mesh()
    if spec.is_two_inclusions:
        return [X < 0.0, X > 0.0]
    return [np.ones_like(X, dtype=bool)]


def _argmax(values: np.ndarray, mask: np.ndarray) -> Tuple[int, int]:
    # np.argmax returns the first hit in C order, i.e. the smallest (i, j)
    masked = np.where(mask, values, -np.inf)
    return np.unravel_index(int(np.argmax(masked)), values.shape)


def metrics(f_comp: np.ndarray, f_true: np.ndarray, grid: SpatialGrid, spec: SourceSpec,
            noise_level: float = 0.0) -> List[MetricsRow]:
    """
    Max-value, localization and L2 errors of a reconstruction.

    Two-inclusion sources give one row per half-plane (x < 0, then x > 0).

    Args:
        f_comp: Reconstructed initial condition on ``grid``
        f_true: True initial condition on ``grid``
        grid: Measurement grid
        spec: Source geometry (decides the half-plane split)
        noise_level: Value stored in the noise_level column

    Returns:
        List of MetricsRow

    Raises:
        ValueError: If the fields disagree in shape or f_true vanishes in a region
    """
    shape = (grid.n_side, grid.n_side)
    if f_comp.shape != shape or f_true.shape != shape:
        raise ValueError(f"Fields must have shape {shape}, got {f_comp.shape} and {f_true.shape}")

    rows = []
    for region in _regions(grid, spec):
        i_true, j_true = _argmax(f_true, region)
        i_comp, j_comp = _argmax(f_comp, region)
        max_true = float(f_true[i_true, j_true])
        if max_true <= 0.0:
            raise ValueError("True initial condition vanishes; relative errors are undefined")
        max_comp = float(f_comp[i_comp, j_comp])

        pos_true = (float(grid.x[i_true]), float(grid.y[j_true]))
        pos_comp = (float(grid.x[i_comp]), float(grid.y[j_comp]))
        true_norm = np.linalg.norm(f_true[region])
        rows.append(MetricsRow(
            noise_level=float(noise_level),
            max_true=max_true,
            max_comp=max_comp,
            error_rel=abs(max_comp - max_true) / max_true,
            pos_true=pos_true,
            pos_comp=pos_comp,
            dis_err=float(np.hypot(pos_comp[0] - pos_true[0], pos_comp[1] - pos_true[1])),
            rel_l2=float(np.linalg.norm(f_comp[region] - f_true[region]) / true_norm),
        ))
    return rows


def truncation_report(field: SpaceTimeField, basis: TimeBasis, n_values: Sequence[int] = (10, 20, 30)) -> TruncationReport:
    """
    Quality of the N-term partial sum of u at t = 0.

    Gram-Schmidt is sequential, so the first n functions of ``basis`` are the
    order-n basis and one build serves every n.

    Args:
        field: Forward solution sampled on the basis partition
        basis: Basis of order at least max(n_values)
        n_values: Truncation orders to compare

    Returns:
        TruncationReport; node errors are |partial sum - u(., 0)| / max|u(., 0)|
    """
    if field.partition != basis.partition:
        raise ValueError("Field and basis live on different time partitions")
    u0 = field.values[0]
    scale = np.max(np.abs(u0))
    norm = np.linalg.norm(u0)
    if scale == 0.0:
        raise ValueError("Field vanishes at t = 0; relative errors are undefined")

    entries = []
    for n in n_values:
        coefficients = basis.project(field.values, n)
        partial = np.tensordot(basis.samples[0, :n], coefficients, axes=1)
        error = np.abs(partial - u0)
        entries.append(TruncationEntry(
            n_basis=int(n),
            rel_l2=float(np.linalg.norm(partial - u0) / norm),
            max_rel=float(error.max() / scale),
            node_error=error / scale,
            partial=partial,
        ))
        logger.info(f"Truncation N={n}: relative L2 error {entries[-1].rel_l2:.3e}")
    return TruncationReport(field.grid, entries, u0)


def node_range(values: np.ndarray, first: int, last: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row-major node numbers first..last (1-based) and the matching values."""
    flat = np.asarray(values).ravel()
    if not 1 <= first <= last <= flat.size:
        raise ValueError(f"Node range [{first}, {last}] outside [1, {flat.size}]")
    numbers = np.arange(first, last + 1)
    return numbers, flat[numbers - 1]


def discrete_h1_distance(U: np.ndarray, V: np.ndarray, grid: SpatialGrid) -> float:
    """
    sqrt(d_x^2 sum |U - V|^2 + d_x^2 sum |D(U - V)|^2) over interior nodes,
    with forward differences D; trailing component axes are summed too.
    """
    diff = np.asarray(U, dtype=float) - np.asarray(V, dtype=float)
    inner = slice(1, -1)
    dx = (diff[2:, inner] - diff[inner, inner]) / grid.d_x
    dy = (diff[inner, 2:] - diff[inner, inner]) / grid.d_x
    total = np.sum(diff[inner, inner] ** 2) + np.sum(dx ** 2) + np.sum(dy ** 2)
    return float(grid.d_x * np.sqrt(total))
