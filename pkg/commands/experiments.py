"""
Experiment commands: run, sweep and truncation-report.
"""

import functools
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import click

from config import SOLVERS, ExperimentConfig, parse_key_values
from models.errors import QrmError
from services.experiment_runner import ExperimentRunner

logger = logging.getLogger(__name__)


def experiment_options(func):
    """Flags shared by every experiment command."""
    options = [
        click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
                     help='key=value config file (a run manifest works too)'),
        click.option('--profile', default='default', show_default=True,
                     help='Profile supplying defaults: full, quick, testing'),
        click.option('--test', type=click.IntRange(1, 4), default=None, help='Source test 1-4'),
        click.option('--seed', type=int, default=None, help='Noise seed'),
        click.option('--epsilon', type=float, default=None, help='Regularization parameter'),
        click.option('--nx', type=int, default=None, help='Grid subdivisions per axis'),
        click.option('--nt', type=int, default=None, help='Time subdivisions'),
        click.option('--n-basis', type=int, default=None, help='Truncation order N'),
        click.option('--solver', type=click.Choice(SOLVERS), default=None, help='Least-squares solver'),
        click.option('--inverse-crime/--no-inverse-crime', default=None,
                     help='Generate data on the inversion grid itself'),
        click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory'),
        click.option('--n-jobs', type=int, default=None, help='Parallel noise levels'),
        click.option('--dump-matrix/--no-dump-matrix', default=None, help='Write the Matrix Market system'),
        click.option('--dump-data/--no-dump-data', default=None, help='Write Cauchy and indirect data CSVs'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_config(config_file: Optional[str], profile: str, **overrides) -> ExperimentConfig:
    if config_file:
        return ExperimentConfig.from_file(config_file, profile, **overrides)
    return ExperimentConfig.from_profile(profile, **overrides)


def handle_errors(func):
    """Log pipeline and argument failures and exit with status 1."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (QrmError, ValueError, FileNotFoundError) as e:
            logger.error(f"{func.__name__.replace('_command', '')} failed: {e}")
            click.echo(f"Error: {e}", err=True)
            raise SystemExit(1)

    return wrapper


def _deltas(values: Tuple[float, ...]) -> Optional[Tuple[float, ...]]:
    return tuple(values) if values else None


def _file_deltas(config_file: Optional[str]) -> Optional[Tuple[float, ...]]:
    if not config_file:
        return None
    values = parse_key_values(Path(config_file).read_text(encoding='utf-8').splitlines())
    return values.get('deltas')


def _int_list(text: str, option: str) -> List[int]:
    try:
        return [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ValueError(f"{option} must be comma-separated integers, got {text!r}")


@click.command('run')
@experiment_options
@click.option('--delta', 'deltas', type=float, multiple=True, help='Noise level (repeatable)')
@handle_errors
def run_command(config_file, profile, deltas, **overrides):
    """Reconstruct the initial condition of one test at the given noise levels."""
    cfg = load_config(config_file, profile, deltas=_deltas(deltas), **overrides)
    result = ExperimentRunner(cfg).run()
    click.echo(result.table.to_string(index=False))
    click.echo(f"Artifacts written to {result.out_dir}")


@click.command('sweep')
@experiment_options
@click.option('--delta', 'deltas', type=float, multiple=True,
              help='Noise level (repeatable); defaults to the standard levels of the test')
@handle_errors
def sweep_command(config_file, profile, deltas, **overrides):
    """Run a noise sweep and print the combined metrics table."""
    cfg = load_config(config_file, profile, deltas=_deltas(deltas), **overrides)
    # --delta beats a deltas= line in the config file, which beats the standard levels
    levels = _deltas(deltas) or _file_deltas(config_file)
    table = ExperimentRunner(cfg).sweep(levels)
    click.echo(table.to_string(index=False))


@click.command('truncation-report')
@experiment_options
@click.option('--n-values', default='10,20,30', show_default=True, help='Comma-separated truncation orders')
@click.option('--node-range', default=None,
              help='first,last row-major node numbers to tabulate, e.g. 900,1050')
@handle_errors
def truncation_report_command(config_file, profile, n_values, node_range, **overrides):
    """Compare partial sums of the forward solution at t = 0 for several N."""
    orders = _int_list(n_values, '--n-values')
    nodes = None
    if node_range is not None:
        bounds = _int_list(node_range, '--node-range')
        if len(bounds) != 2:
            raise ValueError(f"--node-range takes exactly two node numbers, got {node_range!r}")
        nodes = tuple(bounds)
    cfg = load_config(config_file, profile, **overrides)
    # the basis has to reach the largest requested order
    cfg = cfg.with_overrides(n_basis=max(orders)) if orders else cfg
    report = ExperimentRunner(cfg).truncation(orders, nodes)
    for entry in report.summary():
        click.echo(f"N={entry['n_basis']:3d}  rel_l2={entry['rel_l2']:.4e}  max_rel={entry['max_rel']:.4e}")
