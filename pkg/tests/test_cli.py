import csv
import json
from pathlib import Path

import numpy as np
import pytest

import main
from cli.runconfig import load_config, parse_config, with_tasks
from cli.runner import EXIT_CONFIG, EXIT_OK
from cli.writers import normalize, write_csv, write_plot_data, write_records
from core.errors import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / 'configs'

SMALL = {'N': '6', 'ETA': '0.02', 'DELTA': '0', 'LEFT_FAMILY': 'trig_series',
         'LEFT_COEFFICIENTS': '0, pi, 0, -eta/pi**2', 'NX': '48', 'NY': '16'}


def write_config(path: Path, values: dict) -> Path:
    path.write_text(''.join(f'{key}={value}\n' for key, value in values.items()), encoding='utf-8')
    return path


class TestParseConfig:
    def test_defaults(self):
        run = parse_config({'N': '10', 'ETA': '0', 'DELTA': '0'})
        assert run.tasks == ('validate',)
        assert run.mesh_nx == 200
        assert run.spec.N == 10.0

    def test_prerequisites(self):
        run = parse_config({**SMALL, 'TASKS': 'certify'})
        assert run.tasks == ('validate', 'solve', 'decompose', 'nodal', 'certify')

    @pytest.mark.parametrize('task', ['hadamard', 'partition'])
    def test_checked_tasks_validate_first(self, task):
        assert parse_config({**SMALL, 'TASKS': task}).tasks[0] == 'validate'

    def test_nx_sets_the_mesh(self):
        run = parse_config({**SMALL, 'NX': '60'})
        assert run.mesh_nx == 60

    @pytest.mark.parametrize('key,value', [
        ('FOO', '1'),
        ('NX', '47'),
        ('NY', '8'),
        ('SOLVER_TOL', '1e-3'),
        ('TASKS', 'solve,plot'),
        ('PARTITION_DEPTH', '5'),
        ('COURANT_K', '1'),
        ('NUM_PAIRS', '2.5'),
    ])
    def test_rejected_values_name_their_key(self, key, value):
        with pytest.raises(ConfigError) as info:
            parse_config({**SMALL, key: value})
        assert info.value.key == key

    def test_single_sweep_value(self):
        with pytest.raises(ConfigError) as info:
            parse_config({**SMALL, 'TASKS': 'sweep', 'SWEEP_PARAM': 'N', 'SWEEP_VALUES': '6'})
        assert info.value.key == 'SWEEP_VALUES'

    def test_unknown_sweep_param(self):
        with pytest.raises(ConfigError) as info:
            parse_config({**SMALL, 'TASKS': 'sweep', 'SWEEP_PARAM': 'KMAX', 'SWEEP_VALUES': '6, 8'})
        assert info.value.key == 'SWEEP_PARAM'

    def test_variation_follows_expressions(self):
        run = parse_config({**SMALL, 'TASKS': 'nodal,sweep', 'SWEEP_PARAM': 'ETA', 'SWEEP_VALUES': '0.01, 0.03'})
        variation = run.variation('ETA', 0.03)
        assert variation.spec.eta == 0.03
        assert variation.spec.left(0.5) == pytest.approx(-0.03 / np.pi ** 2)
        assert 'sweep' not in variation.tasks
        assert variation.sweep_param is None
        assert variation.name == 'run_eta_0.03'

    def test_with_tasks(self):
        run = with_tasks(parse_config(SMALL), ['nodal'])
        assert run.tasks == ('solve', 'nodal')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'absent.cfg')

    def test_shipped_configs_parse(self):
        for path in sorted(CONFIGS.glob('*.cfg')):
            run = load_config(path)
            assert run.name == path.stem


class TestWriters:
    def test_normalize(self):
        payload = normalize({'a': np.float64(0.1), 'b': [np.nan, np.inf], 'c': np.arange(2), 'd': np.bool_(True)})
        assert payload == {'a': 0.1, 'b': [None, None], 'c': [0, 1], 'd': True}

    def test_csv_format(self, tmp_path):
        path = write_csv(tmp_path / 'out.csv', ('x', 'flag', 'note'), [(0.1, True, None)])
        assert path.read_text().splitlines() == ['x,flag,note', '0.10000000000000001,true,']

    def test_records_collect_columns(self, tmp_path):
        path = write_records(tmp_path / 'rows.csv', [{'a': 1}, {'a': 2, 'b': 3}])
        with path.open() as handle:
            rows = list(csv.DictReader(handle))
        assert rows == [{'a': '1', 'b': ''}, {'a': '2', 'b': '3'}]

    def test_plot_data(self, tmp_path):
        path = write_plot_data(tmp_path / 'plot.dat', {'x': [0.0, 1.0], 'y': [2.0, 3.0]})
        lines = path.read_text().splitlines()
        assert lines[0] == '# x y'
        assert lines[2] == '1 3'


class TestMain:
    def test_malformed_config(self, tmp_path, capsys):
        config_path = write_config(tmp_path / 'bad.cfg', {**SMALL, 'NX': '10'})
        out = tmp_path / 'out'
        code = main.main(['solve', '--config', str(config_path), '--out', str(out)])
        assert code == EXIT_CONFIG
        error = json.loads((out / 'error.json').read_text())
        assert error['error'] == 'ConfigError'
        assert error['key'] == 'NX'
        assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])['key'] == 'NX'

    def test_missing_config(self, tmp_path):
        code = main.main(['validate', '--config', str(tmp_path / 'absent.cfg'), '--out', str(tmp_path)])
        assert code == EXIT_CONFIG
        assert json.loads((tmp_path / 'error.json').read_text())['key'] is None

    def test_workers_must_be_positive(self, tmp_path):
        code = main.main(['validate', '--config', str(CONFIGS / 'rectangle.cfg'), '--workers', '0'])
        assert code == EXIT_CONFIG

    def test_validate(self, tmp_path):
        code = main.main(['validate', '--config', str(CONFIGS / 'rectangle.cfg'), '--out', str(tmp_path)])
        assert code == EXIT_OK
        validation = json.loads((tmp_path / 'validation.json').read_text())
        assert validation['passed'] is True
        report = json.loads((tmp_path / 'report.json').read_text())
        assert report['config']['tasks'] == ['validate']

    def test_solve_rectangle(self, tmp_path):
        code = main.main(['solve', '--config', str(CONFIGS / 'rectangle.cfg'), '--out', str(tmp_path)])
        assert code == EXIT_OK
        report = json.loads((tmp_path / 'report.json').read_text())
        assert [pair['index'] for pair in report['eigenpairs']] == [1, 2]
        assert report['eigenpairs'][1]['mu'] == pytest.approx(10.26439, rel=5e-3)
        assert (tmp_path / 'eigenpairs.csv').exists()
        assert (tmp_path / 'mesh.txt').read_text().startswith('nodes ')

    def test_nodal_outputs(self, tmp_path):
        config_path = write_config(tmp_path / 'small.cfg', {**SMALL, 'TASKS': 'nodal'})
        out = tmp_path / 'out'
        assert main.main(['run', '--config', str(config_path), '--out', str(out)]) == EXIT_OK
        report = json.loads((out / 'report.json').read_text())
        assert report['config']['tasks'] == ['solve', 'nodal']
        assert report['nodal']['proj_diameter'] < 0.5
        assert (out / 'nodal_curve.dat').read_text().startswith('# x y')

    def test_decompose_reports_verdicts(self, tmp_path):
        config_path = write_config(tmp_path / 'small.cfg', {**SMALL, 'TASKS': 'decompose'})
        out = tmp_path / 'out'
        assert main.main(['run', '--config', str(config_path), '--out', str(out)]) == EXIT_OK
        decomposed = json.loads((out / 'report.json').read_text())['decompose']
        assert list(decomposed['residual_sups']) == ['order0', 'order1', 'order2', 'order3']
        assert decomposed['sup_E'] == decomposed['residual_sups']['order0']
        names = [check['name'] for check in decomposed['checks']]
        assert 'duhamel_reconstruction_k1' in names and 'ode_residual_k1' in names
        assert decomposed['passed'] == all(check['passed'] for check in decomposed['checks'])
        with (out / 'duhamel.csv').open() as handle:
            rows = list(csv.DictReader(handle))
        assert rows[0]['k'] == '1' and rows[0]['passed'] in ('true', 'false')

    def test_runs_are_deterministic(self, tmp_path):
        config_path = write_config(tmp_path / 'small.cfg', {**SMALL, 'TASKS': 'nodal'})
        for name in ('a', 'b'):
            assert main.main(['run', '--config', str(config_path), '--out', str(tmp_path / name)]) == EXIT_OK
        assert (tmp_path / 'a' / 'report.json').read_bytes() == (tmp_path / 'b' / 'report.json').read_bytes()
        assert (tmp_path / 'a' / 'nodal_curve.csv').read_bytes() == (tmp_path / 'b' / 'nodal_curve.csv').read_bytes()

    def test_sweep_keeps_failed_points(self, tmp_path):
        config_path = write_config(tmp_path / 'sweep.cfg', {
            **SMALL, 'TASKS': 'validate,nodal,sweep', 'SWEEP_PARAM': 'ETA', 'SWEEP_VALUES': '0.01, -1',
        })
        out = tmp_path / 'out'
        assert main.main(['sweep', '--config', str(config_path), '--out', str(out)]) == EXIT_OK
        with (out / 'sweep.csv').open() as handle:
            rows = list(csv.DictReader(handle))
        assert [row['status'] for row in rows] == ['ok', 'failed']
        assert float(rows[0]['mu2']) > np.pi ** 2
        assert rows[1]['error'].startswith('InvalidParameter')
        assert (out / 'sweep_eta.dat').exists()

    def test_empty_sweep(self, tmp_path):
        config_path = write_config(tmp_path / 'sweep.cfg', {**SMALL, 'TASKS': 'sweep', 'SWEEP_PARAM': 'N'})
        assert main.main(['sweep', '--config', str(config_path), '--out', str(tmp_path)]) == EXIT_CONFIG

    @pytest.mark.slow
    def test_out_of_regime_failures_are_flagged(self, tmp_path):
        code = main.main(['run', '--config', str(CONFIGS / 'out_of_regime.cfg'), '--out', str(tmp_path)])
        assert code == EXIT_OK
        report = json.loads((tmp_path / 'report.json').read_text())
        assert report['validation']['passed'] is True
        certificate = report['certificate']
        assert certificate['passed'] is False
        assert 'eta_calibrated' in certificate['failures']
