from __future__ import annotations

from pathlib import Path

from ..config import load_settings


def project_root() -> Path:
    """Return the project root directory (repository root)."""
    # This file: <repo>/sublinfrechet/utils/paths.py → parents[2] is <repo>
    return Path(__file__).resolve().parents[2]


def data_dir() -> Path:
    """Return the data directory (SUBLINFRECHET_DATA_DIR or <repo>/data), creating it if missing."""
    target = load_settings().data_dir or (project_root() / "data")
    target.mkdir(parents=True, exist_ok=True)
    return target


def curves_dir() -> Path:
    """Return the generated-curves directory under data/curves, creating it if missing."""
    target = data_dir() / "curves"
    target.mkdir(parents=True, exist_ok=True)
    return target


def reports_dir() -> Path:
    """Return the reports directory under data/reports, creating it if missing."""
    target = data_dir() / "reports"
    target.mkdir(parents=True, exist_ok=True)
    return target
