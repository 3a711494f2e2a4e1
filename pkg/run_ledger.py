"""
Run Ledger - manifests next to every output file plus a SQLite history of runs.
"""

import json
import os
import sqlite3
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from experiment_config import ARTIFACT_VERSION, CSV_SCHEMA_VERSION


@dataclass
class RunManifest:
    command: str
    config_hash: str
    started_at: str
    finished_at: str = ""
    artifact_version: str = ARTIFACT_VERSION
    schema_version: int = CSV_SCHEMA_VERSION
    columns: List[str] = field(default_factory=list)
    data_file: str = ""
    extra_files: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, out_dir: str, name: str) -> str:
        path = os.path.join(out_dir, f"{name}.manifest.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return path

    @classmethod
    def read(cls, path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as f:
            return cls(**json.load(f))


class RunLedger:
    """
    Persistent history of lab runs.

    Tables:
    - runs: one row per command invocation (config hash, status, summary)
    """

    def __init__(self, db_path: str = None):
        if db_path is None:
            data_dir = os.environ.get('DIOLAB_DATA_PATH')
            if data_dir:
                os.makedirs(data_dir, exist_ok=True)
                db_path = os.path.join(data_dir, "diolab.db")
            else:
                db_path = "memory/diolab.db"

        self.db_path = db_path
        os.makedirs(os.path.dirname(db_path) or ".", exist_ok=True)
        self._init_db()

    def _init_db(self):
        """Initialize database tables if they don't exist."""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('''
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                command TEXT NOT NULL,
                config_hash TEXT NOT NULL,
                status TEXT NOT NULL,
                exit_code INTEGER NOT NULL,
                data_file TEXT,
                summary TEXT,
                started_at TEXT,
                finished_at TEXT,
                created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
            )
        ''')
        conn.commit()
        conn.close()

    def log_run(self, manifest: RunManifest, status: str, exit_code: int) -> int:
        """Record a finished run; returns its row id."""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('''
            INSERT INTO runs (command, config_hash, status, exit_code, data_file, summary, started_at, finished_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?)
        ''', (manifest.command, manifest.config_hash, status, exit_code, manifest.data_file,
              json.dumps(manifest.summary, sort_keys=True), manifest.started_at, manifest.finished_at))
        run_id = cursor.lastrowid
        conn.commit()
        conn.close()
        return run_id

    def get_run_history(self, command: str = None, config_hash: str = None,
                        limit: int = 10) -> List[Dict[str, Any]]:
        """Most recent runs first, optionally filtered by command and/or config hash."""
        conn = sqlite3.connect(self.db_path)
        conn.row_factory = sqlite3.Row
        cursor = conn.cursor()
        clauses, params = [], []
        if command:
            clauses.append("command = ?")
            params.append(command)
        if config_hash:
            clauses.append("config_hash = ?")
            params.append(config_hash)
        where = f"WHERE {' AND '.join(clauses)}" if clauses else ""
        cursor.execute(f'SELECT * FROM runs {where} ORDER BY id DESC LIMIT ?', (*params, limit))
        rows = cursor.fetchall()
        conn.close()

        history = []
        for row in rows:
            entry = dict(row)
            entry["summary"] = json.loads(entry["summary"]) if entry["summary"] else {}
            history.append(entry)
        return history

    def get_stats(self) -> Dict[str, Any]:
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()
        cursor.execute('SELECT COUNT(*) FROM runs')
        total = cursor.fetchone()[0]
        cursor.execute("SELECT COUNT(*) FROM runs WHERE status = 'SUCCESS'")
        successful = cursor.fetchone()[0]
        cursor.execute('SELECT COUNT(DISTINCT config_hash) FROM runs')
        configs = cursor.fetchone()[0]
        conn.close()
        return {
            "total_runs": total,
            "successful_runs": successful,
            "failed_runs": total - successful,
            "distinct_configs": configs,
        }


# Singleton instance for easy import
_ledger_instance: Optional[RunLedger] = None


def get_run_ledger(db_path: str = None) -> RunLedger:
    """Get or create the singleton RunLedger instance."""
    global _ledger_instance
    if _ledger_instance is None or (db_path is not None and _ledger_instance.db_path != db_path):
        _ledger_instance = RunLedger(db_path)
    return _ledger_instance
