"""
Tests for Run Ledger module.
"""

import os
import tempfile

import pytest

import run_ledger
from run_ledger import RunLedger, RunManifest, get_run_ledger


@pytest.fixture
def ledger():
    """Create a temporary ledger for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        db_path = os.path.join(tmpdir, "test_diolab.db")
        yield RunLedger(db_path)


def make_manifest(command="search", config_hash="abc123", **summary):
    return RunManifest(command=command, config_hash=config_hash, started_at="2026-01-01T00:00:00+00:00",
                       finished_at="2026-01-01T00:00:05+00:00", columns=["q"], data_file=f"{command}.csv",
                       summary=summary)


class TestRuns:
    """Tests for run logging and history."""

    def test_log_run(self, ledger):
        """Test logging a successful run."""
        run_id = ledger.log_run(make_manifest(solutions=4), "SUCCESS", 0)

        assert run_id is not None
        assert run_id > 0

    def test_history_keeps_summary(self, ledger):
        """Test the summary survives the round trip through SQLite."""
        ledger.log_run(make_manifest(solutions=4, modulus=6), "SUCCESS", 0)

        history = ledger.get_run_history()
        assert len(history) == 1
        assert history[0]["summary"] == {"solutions": 4, "modulus": 6}
        assert history[0]["data_file"] == "search.csv"

    def test_history_filters(self, ledger):
        """Test filtering by command and config hash."""
        ledger.log_run(make_manifest("search", "h1"), "SUCCESS", 0)
        ledger.log_run(make_manifest("cusp", "h1"), "SUCCESS", 0)
        ledger.log_run(make_manifest("search", "h2"), "FAILED", 3)

        assert len(ledger.get_run_history(limit=10)) == 3
        assert len(ledger.get_run_history(command="search")) == 2
        assert len(ledger.get_run_history(config_hash="h1")) == 2
        assert len(ledger.get_run_history(command="search", config_hash="h2")) == 1

    def test_most_recent_first(self, ledger):
        """Test ordering and limit."""
        for k in range(5):
            ledger.log_run(make_manifest(config_hash=f"h{k}"), "SUCCESS", 0)

        history = ledger.get_run_history(limit=2)
        assert [h["config_hash"] for h in history] == ["h4", "h3"]


class TestStats:
    """Tests for statistics."""

    def test_get_stats(self, ledger):
        """Test getting overall stats."""
        ledger.log_run(make_manifest("search", "h1"), "SUCCESS", 0)
        ledger.log_run(make_manifest("search", "h1"), "SUCCESS", 0)
        ledger.log_run(make_manifest("crosscheck", "h2"), "FAILED", 4)

        stats = ledger.get_stats()

        assert stats["total_runs"] == 3
        assert stats["successful_runs"] == 2
        assert stats["failed_runs"] == 1
        assert stats["distinct_configs"] == 2

    def test_empty_stats(self, ledger):
        """Test stats of an empty ledger."""
        assert ledger.get_stats()["total_runs"] == 0


class TestManifest:
    """Tests for manifest files."""

    def test_write_and_read(self, tmp_path):
        """Test writing and reading a manifest."""
        manifest = make_manifest(solutions=7)
        path = manifest.write(str(tmp_path), "search")

        assert os.path.basename(path) == "search.manifest.json"
        assert RunManifest.read(path) == manifest

    def test_versions_recorded(self, tmp_path):
        """Test versions are recorded."""
        path = make_manifest().write(str(tmp_path), "search")
        loaded = RunManifest.read(path)
        assert loaded.artifact_version
        assert loaded.schema_version >= 1


class TestSingleton:
    """Tests for the shared ledger instance."""

    def test_uses_data_path(self, tmp_path, monkeypatch):
        """Test the data path from the environment."""
        monkeypatch.setenv("DIOLAB_DATA_PATH", str(tmp_path / "data"))
        monkeypatch.setattr(run_ledger, "_ledger_instance", None)

        ledger = get_run_ledger()
        assert ledger.db_path == os.path.join(str(tmp_path / "data"), "diolab.db")
        assert get_run_ledger() is ledger
