import json

import pandas as pd
import pytest

from cli.run_config import RunConfig, parse_vce
from config import SIMULATION_CONFIG
from main import build_parser, main
from simulation.harness import CSV_COLUMNS
from utils.errors import DataValidationError
from utils.io import read_json, read_result_csv

TOY_ARGS = ['--y', 'y', '--x', 'x', '--z-list', 'A', 'B', 'C', 'D', 'E']


def _select(toy_csv, tmp_path, *extra):
    out = tmp_path / 'selection.json'
    code = main(['select', '--data', str(toy_csv), *TOY_ARGS, '--out', str(out), *extra])
    return code, out


def test_select_alasso(toy_csv, tmp_path):
    code, out = _select(toy_csv, tmp_path)
    assert code == 0
    doc = read_json(out)
    assert doc['command'] == 'select'
    assert doc['selection']['invalid']['names'] == ['D', 'E']
    assert doc['selection']['invalid']['index'] == [4, 5]
    assert doc['run_config']['method'] == 'alasso'
    assert doc['schema_version'] == '1.0'


def test_select_cim_with_anderson_rubin(toy_csv, tmp_path):
    code, out = _select(toy_csv, tmp_path, '--method', 'cim', '--test', 'ar')
    assert code == 0
    assert read_json(out)['selection']['valid']['names'] == ['A', 'B', 'C']


def test_select_with_stub(toy_frame, tmp_path):
    frame = toy_frame.rename(columns={c: f"sh{i + 1}" for i, c in enumerate('ABCDE')})
    path = tmp_path / 'stub.csv'
    frame.to_csv(path, index=False, float_format='%.17g')
    out = tmp_path / 'sel.json'
    code = main(['select', '--data', str(path), '--y', 'y', '--x', 'x', '--z-stub', 'sh',
                 '--out', str(out)])
    assert code == 0
    assert read_json(out)['selection']['invalid']['names'] == ['sh4', 'sh5']


def test_estimate_after_selection(toy_csv, tmp_path):
    _, selection = _select(toy_csv, tmp_path)
    out = tmp_path / 'estimates.json'
    code = main(['estimate', '--data', str(toy_csv), *TOY_ARGS, '--selection', str(selection),
                 '--estimators', 'tsls', 'liml', '--out', str(out)])
    assert code == 0
    doc = read_json(out)
    assert doc['selection']['invalid_names'] == ['D', 'E']
    assert [row['estimator'] for row in doc['table']] == ['tsls', 'liml']
    for row in doc['table']:
        assert row['beta'] == pytest.approx(0.0, abs=1e-8)
        assert row['n_invalid'] == 2
    assert doc['estimates'][0]['invalid_names'] == ['D', 'E']


def test_estimate_without_selection_uses_all_shares(toy_csv, tmp_path):
    out = tmp_path / 'estimates.json'
    assert main(['estimate', '--data', str(toy_csv), *TOY_ARGS, '--out', str(out)]) == 0
    doc = read_json(out)
    assert doc['selection'] is None
    assert doc['table'][0]['n_invalid'] == 0
    assert doc['table'][0]['beta'] > 0.1


def test_domain_error_written_as_json(toy_csv, capsys):
    code = main(['select', '--data', str(toy_csv), '--y', 'y', '--x', 'x',
                 '--z-list', 'A', 'F'])
    assert code == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc['error']['type'] == 'MissingColumnError'
    assert doc['error']['details']['column'] == 'F'


def test_ssiv_estimator_needs_location(toy_csv, capsys):
    code = main(['estimate', '--data', str(toy_csv), *TOY_ARGS, '--estimators', 'ssiv'])
    assert code == 1
    assert json.loads(capsys.readouterr().out)['error']['type'] == 'DataValidationError'


def test_bad_run_config_exit_code(toy_csv, capsys):
    code = main(['select', '--data', str(toy_csv), *TOY_ARGS, '--vce', 'cluster'])
    assert code == 2
    assert 'error' in json.loads(capsys.readouterr().out)


def test_ssiv_command_with_selection(toy_csv, tmp_path):
    _, selection = _select(toy_csv, tmp_path)
    shares = pd.DataFrame({'location': ['l1'] * 5 + ['l2'] * 5, 'class': list('ABCDE') * 2,
                           'share': [0.1, 0.2, 0.1, 0.3, 0.3, 0.2, 0.2, 0.2, 0.2, 0.2]})
    shifts = pd.DataFrame({'class': list('ABCDE'), 'period': 2000,
                           'shift': [1.0, 2.0, 3.0, 4.0, 5.0]})
    shares.to_csv(tmp_path / 'shares.csv', index=False)
    shifts.to_csv(tmp_path / 'shifts.csv', index=False)
    out = tmp_path / 'ssiv.csv'
    code = main(['ssiv', '--shares', str(tmp_path / 'shares.csv'),
                 '--shifts', str(tmp_path / 'shifts.csv'), '--selection', str(selection),
                 '--out', str(out)])
    assert code == 0
    df = read_result_csv(out)
    assert list(df.columns) == ['location', 'period', 'ssiv']
    assert df['ssiv'].tolist() == pytest.approx([0.1 + 0.4 + 0.3, 0.2 + 0.4 + 0.6])
    assert out.read_text(encoding='utf-8').startswith('# run_config=')


def test_simulate_command(tmp_path):
    out = tmp_path / 'sim.csv'
    code = main(['simulate', '--design', 'late_plurality', '--reps', '1', '--seed', '3',
                 '--out', str(out)])
    assert code == 0
    df = read_result_csv(out)
    assert list(df.columns) == CSV_COLUMNS
    assert set(df['method']) == {'standard', 'oracle', 'alasso', 'cim'}
    assert (df['seed'] == 3).all()


def test_parse_vce():
    assert parse_vce('cluster:region') == ('cluster', 'region')
    assert parse_vce('robust') == ('robust', None)
    with pytest.raises(DataValidationError):
        parse_vce('cluster:')
    with pytest.raises(DataValidationError):
        parse_vce('hc1')


def test_run_config_cluster_consistency():
    rc = RunConfig(command='select', vce='cluster:region')
    assert (rc.vce, rc.cluster) == ('cluster', 'region')
    with pytest.raises(DataValidationError):
        RunConfig(command='select', vce='cluster:region', cluster='state')
    with pytest.raises(DataValidationError):
        RunConfig(command='select', c=0.0)


def test_simulate_share_law_option():
    args = build_parser().parse_args(['simulate', '--design', 'majority', '--z-law', 'uniform(0,1)'])
    assert RunConfig.from_args(args).z_law == 'uniform(0,1)'
    args = build_parser().parse_args(['simulate', '--design', 'plurality'])
    assert RunConfig.from_args(args).z_law == SIMULATION_CONFIG['z_law']
    with pytest.raises(SystemExit):
        build_parser().parse_args(['simulate', '--design', 'majority', '--z-law', 'normal'])


def test_simulate_custom_sample_grid(tmp_path):
    out = tmp_path / 'grid.csv'
    code = main(['simulate', '--design', 'majority', '--reps', '1', '--n-grid', '300', '600',
                 '--z-law', 'uniform(0,1)', '--out', str(out)])
    assert code == 0
    assert sorted(set(read_result_csv(out)['n'])) == [300, 600]
    header = json.loads(out.read_text(encoding='utf-8').splitlines()[0][len('# run_config='):])
    assert header['z_law'] == 'uniform(0,1)'
    assert header['n_grid'] == [300, 600]
    assert main(['simulate', '--design', 'majority', '--n-grid', '1']) == 2
