"""
Shared fixtures for the lab tests.
"""

import math
import os
import sys

import pytest

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import run_ledger  # noqa: E402
import run_log  # noqa: E402

SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0


@pytest.fixture
def sqrt2_theta():
    """theta = sqrt(2) - 1, whose convergent denominators are 1, 2, 5, 12, 29, ..."""
    return [[SQRT2_MINUS_1]]


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Point the ledger and outputs at a temp dir and reset module singletons."""
    monkeypatch.setenv("DIOLAB_DATA_PATH", str(tmp_path / "ledger"))
    monkeypatch.delenv("DIOLAB_OUT", raising=False)
    monkeypatch.delenv("DIOLAB_BUDGET", raising=False)
    monkeypatch.delenv("DIOLAB_WORKERS", raising=False)
    monkeypatch.setattr(run_ledger, "_ledger_instance", None)
    yield tmp_path
    run_log.set_log_dir(None)
