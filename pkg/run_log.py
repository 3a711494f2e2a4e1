"""
Run log - timestamped progress lines on stderr, mirrored into the active output directory.
"""

import os
import sys
from datetime import datetime
from typing import Optional

import pytz

LOG_NAME = "run_log.txt"

_log_file: Optional[str] = None


def get_timezone():
    return pytz.timezone(os.environ.get("DIOLAB_TZ", "UTC"))


def now() -> datetime:
    return datetime.now(get_timezone())


def set_log_dir(out_dir: Optional[str]):
    """Mirror subsequent log lines into <out_dir>/run_log.txt (None stops mirroring)."""
    global _log_file
    if out_dir is None:
        _log_file = None
        return
    os.makedirs(out_dir, exist_ok=True)
    _log_file = os.path.join(out_dir, LOG_NAME)


def log(message: str):
    """Writes to stderr and the run log file."""
    try:
        timestamp = now().strftime("%Y-%m-%d %H:%M:%S")
        formatted_msg = f"[{timestamp}] {message}"
        print(formatted_msg, file=sys.stderr)
        if _log_file:
            with open(_log_file, "a", encoding="utf-8") as f:
                f.write(formatted_msg + "\n")
    except Exception as e:
        print(f"Log error: {e}", file=sys.stderr)


def warn(message: str):
    log(f"Warning: {message}")
