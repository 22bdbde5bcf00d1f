"""Tests for settings loaded from the environment and the logger factory."""

import pytest

from incompat.config import Settings, get_settings
from incompat.errors import ConfigurationError
from incompat.logs import SERVICE_NAME, setup_logger


def test_defaults():
    settings = get_settings()
    assert settings.backend == "cvxpy"
    assert settings.solver == "CLARABEL"
    assert settings.tol == 1e-8
    assert settings.workers == 1


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("INCOMPAT_SOLVER", "scs")
    monkeypatch.setenv("INCOMPAT_TOL", "1e-6")
    monkeypatch.setenv("INCOMPAT_WORKERS", "4")
    monkeypatch.setenv("LOG_LEVEL", "debug")
    settings = Settings.from_env()
    assert (settings.solver, settings.tol, settings.workers, settings.log_level) == ("SCS", 1e-6, 4, "DEBUG")


def test_settings_are_cached(monkeypatch):
    first = get_settings()
    monkeypatch.setenv("INCOMPAT_WORKERS", "3")
    assert get_settings() is first
    get_settings.cache_clear()
    assert get_settings().workers == 3


@pytest.mark.parametrize(
    "var,value",
    [("INCOMPAT_TOL", "0.5"), ("INCOMPAT_TOL", "tight"), ("INCOMPAT_WORKERS", "0"), ("INCOMPAT_MAX_ITERS", "-1")],
)
def test_invalid_environment(monkeypatch, var, value):
    monkeypatch.setenv(var, value)
    with pytest.raises(ConfigurationError, match="invalid setting"):
        Settings.from_env()


def test_logger_service():
    logger = setup_logger("WARNING")
    assert logger.service == SERVICE_NAME
    assert logger.log_level == 30
