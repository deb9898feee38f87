"""
End-to-end reconstruction experiments: forward data, noise, projection,
quasi-reversibility solve, synthesis, metrics and artifacts.
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from config import DEFAULT_SWEEPS, ExperimentConfig
from models.errors import StageError
from models.fields import CauchyData, CoefficientField, IndirectData, SpaceTimeField
from models.grid import NodeSets, SpatialGrid, TimePartition, build_grid, classify_nodes
from models.results import MetricsRow, TruncationReport
from services import artifacts
from tools.forward_solver import extended_grid, extract_cauchy, peaks_coefficient, solve_forward
from tools.noise import NoiseSpec, add_noise, noisy_checksum
from tools.projection import project
from tools.qrm_solver import CoefficientSystem, apply_constraints, assemble, solve
from tools.reconstruction import metrics, reconstruct, truncation_report
from tools.sources import SourceSpec, source_for_test, sample_source
from tools.time_basis import TimeBasis, build_basis, coupling_matrix

logger = logging.getLogger(__name__)


def delta_label(delta: float) -> str:
    return f"{delta:g}"


@dataclass
class RunResult:
    """Outputs of one run over a list of noise levels."""

    out_dir: Path
    rows: List[MetricsRow]
    manifest: Path
    artifacts: List[Path]
    checksums: Dict[float, str] = field(default_factory=dict)
    f_comp: Dict[float, np.ndarray] = field(default_factory=dict)

    @property
    def table(self) -> pd.DataFrame:
        return artifacts.metrics_frame(self.rows)


@dataclass
class ForwardData:
    """Noise-free inputs shared by every noise level of a run."""

    grid: SpatialGrid
    nodes: NodeSets
    partition: TimePartition
    spec: SourceSpec
    f_true: np.ndarray
    forward_field: SpaceTimeField
    cauchy: CauchyData


@dataclass
class DeltaOutcome:
    """Result of one noise level; failures come back as (stage, error) instead of raising."""

    delta: float
    rows: List[MetricsRow] = field(default_factory=list)
    f_comp: Optional[np.ndarray] = None
    checksum: Optional[str] = None
    noisy: Optional[CauchyData] = None
    indirect: Optional[IndirectData] = None
    matrix: object = None
    report: Dict[str, object] = field(default_factory=dict)
    stage: Optional[str] = None
    error: Optional[str] = None


def solve_noise_level(config: ExperimentConfig, data: ForwardData, basis: TimeBasis,
                      system: CoefficientSystem, delta: float) -> DeltaOutcome:
    """Noise -> projection -> QRM -> synthesis -> metrics for one delta."""
    outcome = DeltaOutcome(delta)
    stage = 'noise'
    try:
        noisy = add_noise(data.cauchy, NoiseSpec(delta, config.seed))
        if delta > 0:
            outcome.checksum = noisy_checksum(noisy)
        if config.dump_data:
            outcome.noisy = noisy

        stage = 'projection'
        indirect = project(noisy, basis)
        outcome.indirect = indirect if config.dump_data else None

        stage = 'constraints'
        constrained = apply_constraints(system, indirect)
        if config.dump_matrix:
            outcome.matrix = constrained.stacked()[0]

        stage = 'solve'
        solution = solve(constrained, config.solver, config.iterative_tol, config.max_iterations)
        outcome.report = dict(solution.solver_report)

        stage = 'synthesis'
        outcome.f_comp = reconstruct(solution, basis).f_comp

        stage = 'metrics'
        outcome.rows = metrics(outcome.f_comp, data.f_true, data.grid, data.spec, noise_level=delta)
    except Exception as e:
        logger.error(f"Noise level {delta_label(delta)} failed in stage {stage}: {e}")
        outcome.stage = stage
        outcome.error = f"{type(e).__name__}: {e}"
    return outcome


class ExperimentRunner:
    """Runs one test through the whole reconstruction pipeline."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.out_dir = Path(config.out) / f"test{config.test}"
        self.written: List[Path] = []
        self.checksums: Dict[float, str] = {}

    @contextmanager
    def stage(self, name: str):
        """Tag any failure inside the block with the stage name."""
        logger.info(f"Stage {name} started")
        try:
            yield
        except StageError:
            raise
        except Exception as e:
            raise StageError(name, str(e)) from e
        logger.debug(f"Stage {name} finished")

    def _record(self, path: Path) -> Path:
        self.written.append(Path(path))
        return path

    def make_basis(self, N: Optional[int] = None) -> TimeBasis:
        cfg = self.config
        partition = TimePartition(cfg.T, cfg.nt)
        with self.stage('basis'):
            return build_basis(N or cfg.n_basis, partition, cfg.inner_product)

    def forward(self) -> ForwardData:
        """Sample f_true, solve forward on the solve grid and read the traces."""
        cfg = self.config
        grid = build_grid(cfg.R, cfg.nx)
        nodes = classify_nodes(grid)
        partition = TimePartition(cfg.T, cfg.nt)

        with self.stage('source'):
            spec = source_for_test(cfg.test)
            f_true = sample_source(spec, grid)

        with self.stage('forward'):
            solve_grid = extended_grid(grid, cfg.inverse_crime)
            pad = (solve_grid.n_side - grid.n_side) // 2
            f_ext = np.zeros((solve_grid.n_side, solve_grid.n_side))
            f_ext[pad:pad + grid.n_side, pad:pad + grid.n_side] = f_true
            c_ext = CoefficientField.from_function(solve_grid, peaks_coefficient)
            solution = solve_forward(solve_grid, c_ext, f_ext, partition, progress=cfg.progress)

        with self.stage('cauchy'):
            cauchy = extract_cauchy(solution, grid, nodes)
            field_on_grid = solution.restrict(grid)

        return ForwardData(grid, nodes, partition, spec, f_true, field_on_grid, cauchy)

    def run(self, deltas: Optional[Sequence[float]] = None) -> RunResult:
        """
        Reconstruct the test source at every requested noise level.

        Args:
            deltas: Noise levels (default: the config's)

        Returns:
            RunResult with metrics rows in the order of ``deltas``

        Raises:
            ValueError: If no noise levels are requested
            StageError: If a stage fails; the manifest is still written with
                status=failed and the stage name
        """
        deltas = tuple(self.config.deltas if deltas is None else deltas)
        if not deltas:
            raise ValueError("no noise levels requested")

        self.written = []
        self.checksums = {}
        try:
            rows, f_comps = self._run(deltas)
        except StageError as e:
            self._write_manifest(deltas, status='failed', failed_stage=e.stage)
            raise

        manifest = self._write_manifest(deltas, status='complete', failed_stage='')
        return RunResult(self.out_dir, rows, manifest, list(self.written), dict(self.checksums), f_comps)

    def _run(self, deltas: Sequence[float]):
        cfg = self.config
        basis = self.make_basis()
        with self.stage('coupling'):
            S = coupling_matrix(basis)

        data = self.forward()
        with self.stage('artifacts'):
            self._record(artifacts.write_field(data.f_true, data.grid, self.out_dir / 'f_true.csv'))
            self._record(artifacts.write_basis(basis, self.out_dir / 'basis.csv'))

        with self.stage('assembly'):
            c = CoefficientField.from_function(data.grid, peaks_coefficient)
            system = assemble(data.grid, c, S, cfg.epsilon, cfg.gradient_weight, data.nodes)

        jobs = tqdm(deltas, desc=f"test {cfg.test}", disable=not cfg.progress, leave=False)
        outcomes = Parallel(n_jobs=cfg.n_jobs)(
            delayed(solve_noise_level)(cfg, data, basis, system, delta) for delta in jobs
        )

        rows: List[MetricsRow] = []
        f_comps: Dict[float, np.ndarray] = {}
        for outcome in outcomes:
            if outcome.checksum is not None:
                self.checksums[outcome.delta] = outcome.checksum
            if outcome.error is not None:
                raise StageError(outcome.stage, f"delta={delta_label(outcome.delta)}: {outcome.error}")
            with self.stage('artifacts'):
                self._write_outcome(outcome, data)
            rows.extend(outcome.rows)
            f_comps[outcome.delta] = outcome.f_comp
            for row in outcome.rows:
                logger.info(
                    f"test {cfg.test} delta={delta_label(row.noise_level)}: max_comp={row.max_comp:.4f} "
                    f"error_rel={row.error_rel:.2%} dis_err={row.dis_err:.3f}"
                )

        with self.stage('artifacts'):
            self._record(artifacts.write_metrics(rows, self.out_dir / 'metrics.csv'))
        return rows, f_comps

    def _write_outcome(self, outcome: DeltaOutcome, data: ForwardData):
        label = delta_label(outcome.delta)
        self._record(artifacts.write_field(outcome.f_comp, data.grid, self.out_dir / f"f_comp_delta_{label}.csv"))
        if outcome.noisy is not None:
            self._record(artifacts.write_cauchy(outcome.noisy, self.out_dir / f"cauchy_delta_{label}.csv"))
        if outcome.indirect is not None:
            self._record(artifacts.write_indirect(outcome.indirect, self.out_dir / f"indirect_delta_{label}.csv"))
        if outcome.matrix is not None:
            self._record(artifacts.write_matrix_market(
                outcome.matrix, self.out_dir / f"system_delta_{label}.mtx",
                comment=f"weighted least-squares matrix, test {self.config.test}, delta {label}",
            ))

    def _write_manifest(self, deltas: Sequence[float], status: str, failed_stage: str) -> Path:
        extra = dict(artifacts.versions())
        for delta, checksum in self.checksums.items():
            extra[f"checksum.delta_{delta_label(delta)}"] = checksum
        extra['artifacts'] = ','.join(p.name for p in self.written)
        extra['status'] = status
        extra['failed_stage'] = failed_stage
        config = self.config.with_overrides(deltas=tuple(deltas))
        path = artifacts.write_manifest(self.out_dir / 'manifest.txt', config, extra)
        logger.info(f"Manifest written to {path} (status {status})")
        return path

    def sweep(self, deltas: Optional[Sequence[float]] = None) -> pd.DataFrame:
        """
        Run the noise sweep of the test and return the combined metrics table.

        ``deltas=None`` uses the standard noise levels of the test; an
        explicitly empty list is rejected.
        """
        if deltas is None:
            deltas = DEFAULT_SWEEPS[self.config.test]
        return self.run(deltas).table

    def truncation(self, n_values: Sequence[int] = (10, 20, 30),
                   nodes: Optional[Tuple[int, int]] = None) -> TruncationReport:
        """
        Partial-sum quality of the forward solution at t = 0 for several orders.

        ``nodes=(first, last)`` also writes u(., 0) next to every partial sum
        at row-major node numbers first..last.
        """
        n_values = sorted(set(int(n) for n in n_values))
        if not n_values:
            raise ValueError("no truncation orders requested")
        if nodes is not None:
            first, last = nodes
            n_nodes = build_grid(self.config.R, self.config.nx).n_nodes
            if not 1 <= first <= last <= n_nodes:
                raise ValueError(f"Node range [{first}, {last}] outside [1, {n_nodes}]")
        self.written = []
        basis = self.make_basis(max(n_values))
        data = self.forward()
        with self.stage('truncation'):
            report = truncation_report(data.forward_field, basis, n_values)
        with self.stage('artifacts'):
            for path in artifacts.write_truncation(report, self.out_dir):
                self._record(path)
            if nodes is not None:
                self._record(artifacts.write_node_range(
                    report, first, last, self.out_dir / f"truncation_nodes_{first}_{last}.csv"
                ))
        return report
