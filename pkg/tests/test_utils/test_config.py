import os

import pytest

from common.utils.config import DEFAULTS, get_config, load_mapping

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), 'config')


def test_defaults_without_a_file(monkeypatch):
    monkeypatch.setattr('common.utils.config.DEFAULT_CONFIG_PATH', '/nonexistent/config.yaml')
    config = get_config()
    assert config == DEFAULTS
    assert config['defaults']['tau'] == 0.3
    assert config['defaults']['thresholds'][0] == 0.25
    assert config['defaults']['thresholds'][-1] == 0.95


def test_partial_file_is_layered_over_defaults(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('log_level: DEBUG\ndefaults:\n  tau: 0.5\n')
    config = get_config(str(path))
    assert config['log_level'] == 'DEBUG'
    assert config['defaults']['tau'] == 0.5
    assert config['defaults']['cell_size'] == 0.02
    # the built-in defaults are not mutated
    assert DEFAULTS['defaults']['tau'] == 0.3


def test_shipped_configs_load():
    for name in ('dev_config.yaml', 'test_config.yaml'):
        config = get_config(os.path.join(CONFIG_DIR, name))
        assert set(config['defaults']) >= {'tau', 'cell_size', 'nms_thresh', 'radius', 'box_epsilon'}


def test_missing_explicit_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="Configuration file not found"):
        get_config(str(tmp_path / 'nope.yaml'))


def test_invalid_files(tmp_path):
    bad = tmp_path / 'bad.yaml'
    bad.write_text('defaults: [1, 2\n')
    with pytest.raises(ValueError, match="Error parsing configuration file"):
        load_mapping(str(bad))
    scalar = tmp_path / 'scalar.yaml'
    scalar.write_text('- 1\n- 2\n')
    with pytest.raises(ValueError, match="Invalid configuration format"):
        load_mapping(str(scalar))
    empty = tmp_path / 'empty.yaml'
    empty.write_text('')
    assert load_mapping(str(empty)) == {}
