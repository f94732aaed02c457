"""Shared fixtures for the ctxlab test suite."""

import pytest

from ctxlab.pm_square import build_square
from ctxlab.states import singlet, to_density


@pytest.fixture
def square():
    return build_square()


@pytest.fixture
def singlet_rho():
    return to_density(singlet())


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run from an empty directory with no CTXLAB_* variables set."""
    for name in ("CTXLAB_SEED", "CTXLAB_LOG_LEVEL", "CTXLAB_WORKERS"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
