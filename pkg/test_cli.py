#!/usr/bin/env python3

import pytest
from click.testing import CliRunner

from app import create_app
from services.artifacts import read_manifest


@pytest.fixture
def cli():
    return create_app('testing')


def invoke(cli, *args):
    return CliRunner().invoke(cli, list(args))


def test_version(cli):
    result = invoke(cli, '--version')
    assert result.exit_code == 0
    assert '1.0.0' in result.output


def test_run_single_noise_level(cli, tmp_path):
    result = invoke(cli, 'run', '--profile', 'testing', '--out', str(tmp_path), '--delta', '0')
    assert result.exit_code == 0, result.output
    assert 'noise_level' in result.output
    assert (tmp_path / 'test1' / 'metrics.csv').exists()


def test_run_two_noise_levels(cli, tmp_path):
    result = invoke(
        cli, '--log-level', 'debug', 'run', '--profile', 'testing', '--out', str(tmp_path),
        '--delta', '0', '--delta', '0.25', '--seed', '4',
    )
    assert result.exit_code == 0, result.output
    manifest = read_manifest(tmp_path / 'test1' / 'manifest.txt')
    assert manifest['deltas'] == '0.0,0.25'
    assert manifest['seed'] == '4'
    assert 'checksum.delta_0.25' in manifest


def test_sweep_with_explicit_levels(cli, tmp_path):
    result = invoke(cli, 'sweep', '--profile', 'testing', '--out', str(tmp_path), '--delta', '0.1')
    assert result.exit_code == 0, result.output
    assert (tmp_path / 'test1' / 'f_comp_delta_0.1.csv').exists()


def test_truncation_report(cli, tmp_path):
    result = invoke(cli, 'truncation-report', '--profile', 'testing', '--out', str(tmp_path), '--n-values', '2,4')
    assert result.exit_code == 0, result.output
    lines = [line for line in result.output.splitlines() if line.startswith('N=')]
    assert len(lines) == 2
    assert 'rel_l2=' in lines[0]
    assert (tmp_path / 'test1' / 'truncation.csv').exists()


def test_sweep_reads_levels_from_config_file(cli, tmp_path):
    config_file = tmp_path / 'run.cfg'
    config_file.write_text('test=1\ndeltas=0.05\n', encoding='utf-8')
    out = tmp_path / 'out'
    result = invoke(cli, 'sweep', '--profile', 'testing', '--config', str(config_file), '--out', str(out))
    assert result.exit_code == 0, result.output
    assert (out / 'test1' / 'f_comp_delta_0.05.csv').exists()
    assert not (out / 'test1' / 'f_comp_delta_0.25.csv').exists()
    assert read_manifest(out / 'test1' / 'manifest.txt')['deltas'] == '0.05'


def test_sweep_flag_beats_config_file(cli, tmp_path):
    config_file = tmp_path / 'run.cfg'
    config_file.write_text('deltas=0.05\n', encoding='utf-8')
    out = tmp_path / 'out'
    result = invoke(cli, 'sweep', '--profile', 'testing', '--config', str(config_file), '--out', str(out),
                    '--delta', '0.1')
    assert result.exit_code == 0, result.output
    assert (out / 'test1' / 'f_comp_delta_0.1.csv').exists()
    assert not (out / 'test1' / 'f_comp_delta_0.05.csv').exists()


def test_truncation_node_range(cli, tmp_path):
    result = invoke(cli, 'truncation-report', '--profile', 'testing', '--out', str(tmp_path),
                    '--n-values', '2,4', '--node-range', '210,230')
    assert result.exit_code == 0, result.output
    lines = (tmp_path / 'test1' / 'truncation_nodes_210_230.csv').read_text(encoding='utf-8').splitlines()
    assert lines[0] == 'node,u0,partial_N2,partial_N4'
    assert len(lines) == 22


def test_bad_node_range(cli, tmp_path):
    result = invoke(cli, 'truncation-report', '--profile', 'testing', '--out', str(tmp_path),
                    '--n-values', '2', '--node-range', '1,2,3')
    assert result.exit_code == 1
    assert '--node-range' in result.output


def test_failed_stage_exits_with_status_one(cli, tmp_path):
    result = invoke(cli, 'run', '--profile', 'testing', '--out', str(tmp_path), '--test', '2')
    assert result.exit_code == 1
    assert 'source' in result.output
    assert read_manifest(tmp_path / 'test2' / 'manifest.txt')['status'] == 'failed'


def test_config_file(cli, tmp_path):
    config_file = tmp_path / 'run.cfg'
    config_file.write_text('# coarse run\ntest=1\nnx=20\ndeltas=0.0\nseed=9\n', encoding='utf-8')
    out = tmp_path / 'out'
    result = invoke(cli, 'run', '--profile', 'testing', '--config', str(config_file), '--out', str(out))
    assert result.exit_code == 0, result.output
    manifest = read_manifest(out / 'test1' / 'manifest.txt')
    assert manifest['seed'] == '9'
    assert manifest['nx'] == '20'


def test_missing_config_file(cli, tmp_path):
    result = invoke(cli, 'run', '--profile', 'testing', '--config', str(tmp_path / 'missing.cfg'))
    assert result.exit_code == 1


def test_bad_truncation_orders(cli, tmp_path):
    result = invoke(cli, 'truncation-report', '--profile', 'testing', '--out', str(tmp_path), '--n-values', 'a,b')
    assert result.exit_code == 1
    assert '--n-values' in result.output


def test_unknown_profile(cli, tmp_path):
    result = invoke(cli, 'run', '--profile', 'huge', '--out', str(tmp_path))
    assert result.exit_code == 1


if __name__ == "__main__":
    pytest.main([__file__])
