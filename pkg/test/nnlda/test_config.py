import json
import logging
import os
from unittest.mock import patch

import pytest

from nnlda import config as config_module
from nnlda.config import configs, load_json_config, replace_env_placeholders
from nnlda.logging_config import setup_logging
from nnlda.models.settings import default_synthetic_config, default_train_config


class TestReplaceEnvPlaceholders:
    """Test cases for ${ENV_VAR} substitution in configuration values."""

    @patch.dict(os.environ, {"NNLDA_ROUNDS": "50"})
    def test_nested_values_are_replaced(self):
        """
        Placeholders inside dicts and lists are substituted; other types pass through.
        """
        raw = {"max_rounds": "${NNLDA_ROUNDS}", "seeds": ["${NNLDA_ROUNDS}", 3], "keep_best": True}
        assert replace_env_placeholders(raw) == {"max_rounds": "50", "seeds": ["50", 3], "keep_best": True}

    @patch.dict(os.environ, {}, clear=True)
    def test_missing_variable_kept_with_warning(self, caplog):
        with caplog.at_level(logging.WARNING, logger="nnlda.config"):
            assert replace_env_placeholders("${NOT_SET}") == "${NOT_SET}"
        assert "NOT_SET" in caplog.text


class TestLoadJsonConfig:
    """Test cases for reading the JSON configuration files."""

    def test_bundled_files_are_loaded(self):
        assert configs["training"]["max_rounds"] == 200
        assert configs["evaluation"]["num_folds"] == 10
        assert configs["synthetic"]["num_docs"] == 2000

    def test_config_dir_override(self, tmp_path):
        (tmp_path / "training.json").write_text(json.dumps({"max_rounds": 7}))
        with patch.object(config_module, "CONFIG_DIR", str(tmp_path)):
            assert load_json_config("training.json") == {"max_rounds": 7}

    def test_missing_file_gives_empty_dict(self, tmp_path):
        with patch.object(config_module, "CONFIG_DIR", str(tmp_path)):
            assert load_json_config("training.json") == {}

    def test_malformed_file_gives_empty_dict(self, tmp_path, caplog):
        (tmp_path / "training.json").write_text("{not json")
        with patch.object(config_module, "CONFIG_DIR", str(tmp_path)):
            assert load_json_config("training.json") == {}
        assert "Error loading configuration file" in caplog.text


class TestSettingsDefaults:
    """Test cases for settings built from the loaded configuration."""

    def test_train_config_from_file_with_overrides(self):
        config = default_train_config(max_rounds=12, em_tol=None)
        assert config.max_rounds == 12
        assert config.em_tol == configs["training"]["em_tol"]

    @patch.dict(configs, {"training": {"max_rounds": 9, "unknown_key": 1}})
    def test_unknown_keys_ignored(self):
        assert default_train_config().max_rounds == 9

    def test_synthetic_defaults(self):
        cfg = default_synthetic_config(seed=3)
        assert (cfg.num_docs, cfg.min_len, cfg.max_len, cfg.seed) == (2000, 1, 5, 3)


class TestSetupLogging:
    """Test cases for setup_logging."""

    @patch.dict(os.environ, {"LOG_LEVEL": "DEBUG"})
    def test_level_from_environment(self):
        setup_logging()
        assert logging.getLogger().level == logging.DEBUG

    @patch.dict(os.environ, {"LOG_LEVEL": "not-a-level"})
    def test_unknown_level_falls_back_to_info(self):
        setup_logging()
        assert logging.getLogger().level == logging.INFO

    def test_log_file_created(self, tmp_path):
        log_file = tmp_path / "logs" / "nnlda.log"
        with patch.dict(os.environ, {"LOG_FILE_PATH": str(log_file), "LOG_LEVEL": "INFO"}):
            setup_logging()
            logging.getLogger("nnlda.test").info("hello")
        for handler in logging.getLogger().handlers:
            handler.flush()
        assert "hello" in log_file.read_text()


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)
