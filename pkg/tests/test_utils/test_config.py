"""Tests for environment configuration and logging."""

import logging
from pathlib import Path

import pytest

from src.utils.config import Config, Tolerances
from src.utils.logger import configure_debug_logging, configure_quiet_logging, get_logger


@pytest.fixture
def clean_env(monkeypatch):
    for name in (
        "MOPF_LOG",
        "MOPF_THREADS",
        "MOPF_OUTPUT_DIR",
        "MOPF_FEAS_TOL",
        "MOPF_STAT_TOL",
        "MOPF_ACT_TOL",
    ):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestConfig:
    """Defaults and environment overrides."""

    def test_defaults(self, clean_env):
        config = Config()
        assert config.log_level == logging.WARNING
        assert config.threads == 1
        assert config.output_dir == Path("runs")
        assert config.tolerances == Tolerances()

    def test_environment_overrides(self, clean_env, tmp_path):
        clean_env.setenv("MOPF_LOG", "DEBUG")
        clean_env.setenv("MOPF_THREADS", "4")
        clean_env.setenv("MOPF_OUTPUT_DIR", str(tmp_path))
        clean_env.setenv("MOPF_FEAS_TOL", "1e-6")
        config = Config()
        assert config.log_level == logging.DEBUG
        assert config.threads == 4
        assert config.output_dir == tmp_path
        assert config.tolerances.feasibility == 1e-6
        assert config.tolerances.stationarity == 1e-8

    def test_unknown_level_keeps_default(self, clean_env):
        clean_env.setenv("MOPF_LOG", "chatty")
        assert Config().log_level == logging.WARNING

    def test_threads_at_least_one(self, clean_env):
        clean_env.setenv("MOPF_THREADS", "0")
        assert Config().threads == 1

    def test_ensure_output_dir(self, clean_env, tmp_path):
        clean_env.setenv("MOPF_OUTPUT_DIR", str(tmp_path / "runs" / "a"))
        assert Config().ensure_output_dir().is_dir()


class TestLogger:
    """Logger setup and verbosity switches."""

    def test_single_handler(self):
        first = get_logger("src.tests.single")
        second = get_logger("src.tests.single")
        assert first is second
        assert len(first.handlers) == 1

    def test_explicit_level(self):
        assert get_logger("src.tests.explicit", level=logging.INFO).level == logging.INFO

    def test_verbosity_switches(self):
        logger = get_logger("src.tests.switch", level=logging.WARNING)
        saved = {
            name: item.level
            for name, item in logging.root.manager.loggerDict.items()
            if isinstance(item, logging.Logger)
        }
        try:
            configure_debug_logging()
            assert logger.level == logging.DEBUG
            configure_quiet_logging()
            assert logger.level == logging.ERROR
        finally:
            for name, level in saved.items():
                logging.getLogger(name).setLevel(level)
            if "src" not in saved:
                logging.getLogger("src").setLevel(logging.NOTSET)
