#!/usr/bin/env python3
"""
Configuration tests: environment classes, run files and setting precedence
"""
import os

import pytest
from dotenv import load_dotenv

from sentgraph import config as settings
from sentgraph.config import (get_config, load_run_file, parse_bool, require_input_file, require_output_path,
                              resolve_setting)
from sentgraph.errors import ConfigError
from tests.conftest import write_lines


class TestResolveSetting:
    """Test cases for the flag > file > env > default precedence"""

    def test_default_when_nothing_set(self, monkeypatch):
        monkeypatch.delenv('SENTGRAPH_NEG_NN', raising=False)
        assert resolve_setting('neg_nn', None, {}, 15, int) == 15

    def test_env_beats_default(self, monkeypatch):
        monkeypatch.setenv('SENTGRAPH_NEG_NN', '7')
        assert resolve_setting('neg_nn', None, {}, 15, int) == 7

    def test_file_beats_env(self, monkeypatch):
        monkeypatch.setenv('SENTGRAPH_NEG_NN', '7')
        assert resolve_setting('neg_nn', None, {'neg_nn': '9'}, 15, int) == 9

    def test_flag_beats_everything(self, monkeypatch):
        monkeypatch.setenv('SENTGRAPH_NEG_NN', '7')
        assert resolve_setting('neg_nn', 3, {'neg_nn': '9'}, 15, int) == 3

    def test_bad_value_names_the_setting(self):
        with pytest.raises(ConfigError, match='alpha'):
            resolve_setting('alpha', None, {'alpha': 'lots'}, 0.5, float)


class TestRunFile:
    """Test cases for load_run_file"""

    def test_key_value_lines(self, tmp_path):
        path = write_lines(tmp_path / 'run.env', ['# training run', 'alpha = 0.8', 'encoder=gru'])
        assert load_run_file(path, ['alpha', 'encoder']) == {'alpha': '0.8', 'encoder': 'gru'}

    def test_unknown_key_rejected(self, tmp_path):
        path = write_lines(tmp_path / 'run.env', ['alpha = 0.8', 'colour = blue'])
        with pytest.raises(ConfigError, match='colour'):
            load_run_file(path, ['alpha'])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_file(tmp_path / 'absent.env', ['alpha'])


class TestHelpers:
    """Test cases for small configuration helpers"""

    @pytest.mark.parametrize('text,expected', [('true', True), ('YES', True), ('1', True), ('off', False),
                                               ('False', False), (False, False)])
    def test_parse_bool(self, text, expected):
        assert parse_bool(text) is expected

    def test_parse_bool_rejects_other_words(self):
        with pytest.raises(ConfigError):
            parse_bool('maybe')

    def test_path_checks(self, tmp_path):
        existing = write_lines(tmp_path / 'x.tsv', ['a\tb'])
        assert require_input_file(existing, 'Edge file') == existing
        with pytest.raises(ConfigError, match='Edge file'):
            require_input_file(tmp_path / 'y.tsv', 'Edge file')
        with pytest.raises(ConfigError):
            require_output_path(tmp_path / 'missing' / 'out.txt', 'output')


class TestEnvironmentClasses:
    """Test cases for get_config"""

    @pytest.mark.parametrize('env,expected', [('dev', settings.DevelopmentConfig),
                                              ('test', settings.TestConfig),
                                              ('prod', settings.ProductionConfig),
                                              ('other', settings.DevelopmentConfig)])
    def test_get_config(self, monkeypatch, env, expected):
        monkeypatch.setenv('ENV', env)
        assert type(get_config()) is expected

    def test_class_defaults(self, monkeypatch):
        monkeypatch.delenv('SENTGRAPH_DEBUG_CHECKS', raising=False)
        monkeypatch.delenv('SENTGRAPH_LOG_LEVEL', raising=False)
        assert settings.ProductionConfig().DEBUG_CHECKS is False
        assert settings.DevelopmentConfig().DEBUG_CHECKS is True
        assert settings.TestConfig().LOG_LEVEL == 'WARNING'
        assert settings.ProductionConfig().LOG_LEVEL == 'INFO'

    @pytest.mark.parametrize('env', ['dev', 'test'])
    def test_debug_checks_from_environment(self, monkeypatch, env):
        monkeypatch.setenv('ENV', env)
        monkeypatch.setenv('SENTGRAPH_DEBUG_CHECKS', 'false')
        assert get_config().DEBUG_CHECKS is False
        monkeypatch.setenv('ENV', 'prod')
        monkeypatch.setenv('SENTGRAPH_DEBUG_CHECKS', 'yes')
        assert get_config().DEBUG_CHECKS is True

    def test_log_level_from_environment(self, monkeypatch):
        monkeypatch.setenv('ENV', 'test')
        monkeypatch.setenv('SENTGRAPH_LOG_LEVEL', 'DEBUG')
        assert get_config().LOG_LEVEL == 'DEBUG'

    def test_dotenv_loaded_after_import(self, monkeypatch, tmp_path):
        monkeypatch.delenv('SENTGRAPH_LOG_LEVEL', raising=False)
        monkeypatch.delenv('SENTGRAPH_DEBUG_CHECKS', raising=False)
        monkeypatch.setenv('ENV', 'dev')
        dotenv_file = write_lines(tmp_path / '.env', ['SENTGRAPH_LOG_LEVEL=DEBUG',
                                                        'SENTGRAPH_DEBUG_CHECKS=false'])
        load_dotenv(dotenv_file)
        try:
            config = get_config()
            assert config.LOG_LEVEL == 'DEBUG'
            assert config.DEBUG_CHECKS is False
        finally:
            os.environ.pop('SENTGRAPH_LOG_LEVEL', None)
            os.environ.pop('SENTGRAPH_DEBUG_CHECKS', None)

    def test_invalid_debug_checks_value(self, monkeypatch):
        monkeypatch.setenv('SENTGRAPH_DEBUG_CHECKS', 'sometimes')
        with pytest.raises(ConfigError, match='SENTGRAPH_DEBUG_CHECKS'):
            get_config()
