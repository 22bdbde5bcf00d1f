"""Shared pytest configuration.

Cells that take minutes (hierarchy level 3 at k >= 4, explicit five-basis
SDPs) carry the ``slow`` marker and only run with ``--include-slow``.
"""

import importlib.util

import pytest

from incompat.config import get_settings


def pytest_addoption(parser):
    parser.addoption(
        "--include-slow",
        action="store_true",
        default=False,
        help="run long-running table cells and large SDPs",
    )


def pytest_collection_modifyitems(config, items):
    skip_slow = pytest.mark.skip(reason="needs --include-slow")
    skip_solver = pytest.mark.skip(reason="cvxpy is not installed")
    has_cvxpy = importlib.util.find_spec("cvxpy") is not None
    for item in items:
        if "slow" in item.keywords and not config.getoption("--include-slow"):
            item.add_marker(skip_slow)
        if "solver" in item.keywords and not has_cvxpy:
            item.add_marker(skip_solver)


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default settings, unaffected by the caller's environment."""
    for var in (
        "INCOMPAT_BACKEND",
        "INCOMPAT_SOLVER",
        "INCOMPAT_TOL",
        "INCOMPAT_MAX_ITERS",
        "INCOMPAT_WORKERS",
        "LOG_LEVEL",
    ):
        monkeypatch.delenv(var, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
