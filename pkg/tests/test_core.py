import json
import logging
import math

import pytest

from core.constants import CalibratedConstants, load_constants, save_constants
from core.errors import ConfigError, InvalidParameter, NodalRectError
from core.logging import _resolve_level, setup_logging
from utils.expressions import evaluate_list, evaluate_number


class TestErrors:
    def test_code_is_class_name(self):
        assert InvalidParameter('bad').code == 'InvalidParameter'

    def test_to_dict_drops_missing_details(self):
        error = InvalidParameter('N below 5', parameter='N', value=4.0, hint=None)
        assert error.to_dict() == {'error': 'InvalidParameter', 'message': 'N below 5',
                                   'parameter': 'N', 'value': 4.0}

    def test_config_error_names_key(self):
        error = ConfigError('NX', 'too coarse')
        assert isinstance(error, NodalRectError)
        assert error.key == 'NX'
        assert error.to_dict()['key'] == 'NX'


class TestConstants:
    def test_missing_file_gives_defaults(self, tmp_path):
        assert load_constants(tmp_path / 'absent.json') == CalibratedConstants()

    def test_save_then_load(self, tmp_path):
        path = tmp_path / 'constants.json'
        constants = CalibratedConstants(C_w=4.5, Lambda_slope=1.25)
        save_constants(constants, path)
        assert load_constants(path) == constants

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / 'constants.json'
        path.write_text(json.dumps({'C_w': 1.0, 'C_mystery': 2.0}))
        with pytest.raises(ConfigError) as exc:
            load_constants(path)
        assert exc.value.key == 'C_mystery'

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / 'constants.json'
        path.write_text(json.dumps({'version': 2}))
        with pytest.raises(ConfigError) as exc:
            load_constants(path)
        assert exc.value.key == 'version'

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / 'constants.json'
        path.write_text('{C_w: ')
        with pytest.raises(ConfigError):
            load_constants(path)

    def test_shipped_file_loads(self):
        constants = load_constants('constants.v1')
        assert constants.version == 1
        assert constants.c_cal > 0

    def test_floor_scales_with_h_squared(self):
        constants = CalibratedConstants(C_floor=2.0)
        assert constants.floor(0.1) == pytest.approx(0.02)


class TestLogging:
    def test_file_handler_writes(self, tmp_path):
        log_file = tmp_path / 'logs' / 'run.log'
        setup_logging(log_file=str(log_file), level='debug', console=False)
        logging.getLogger('tests.core').info('hello from the test')
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert 'hello from the test' in log_file.read_text()

    def test_level_names(self):
        assert _resolve_level('warning') == logging.WARNING
        assert _resolve_level(logging.DEBUG) == logging.DEBUG
        with pytest.raises(ValueError):
            _resolve_level('loud')


class TestExpressions:
    @pytest.mark.parametrize('text,expected', [
        ('0.05', 0.05),
        ('-eta/pi', -0.05 / math.pi),
        ('2*eta + delta', 0.2),
        ('(N - 1) ** 2', 81.0),
    ])
    def test_evaluate(self, text, expected):
        names = {'eta': 0.05, 'delta': 0.1, 'N': 10.0}
        assert evaluate_number(text, names) == pytest.approx(expected)

    @pytest.mark.parametrize('text', ['__import__("os")', 'eta.real', 'unknown + 1', '1/0', '[1, 2]', '1 +'])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            evaluate_number(text, {'eta': 0.05})

    def test_list(self):
        assert evaluate_list('0, pi, 0, -eta/pi', {'eta': math.pi}) == pytest.approx([0.0, math.pi, 0.0, -1.0])
        assert evaluate_list('') == []
