"""Settings read from the environment (and an optional .env file)."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from .errors import BadParam

# Load environment variables from .env file
load_dotenv()

DEFAULT_SEED = 20240101
DEFAULT_TRIALS = 400


@dataclass(frozen=True)
class Settings:
    seed: Optional[int]
    data_dir: Optional[Path]
    trials: int
    debug: bool


def _int_env(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise BadParam(f"{name} must be an integer, got {raw!r}") from e


def load_settings() -> Settings:
    """Read settings fresh from the environment (no caching, tests monkeypatch os.environ)."""
    data_dir = os.getenv("SUBLINFRECHET_DATA_DIR")
    return Settings(
        seed=_int_env("SEED", None),
        data_dir=Path(data_dir) if data_dir else None,
        trials=_int_env("SUBLINFRECHET_TRIALS", DEFAULT_TRIALS) or DEFAULT_TRIALS,
        debug=os.getenv("SUBLINFRECHET_DEBUG") == "1",
    )


def resolve_seed(base_seed: Optional[int]) -> int:
    """SEED in the environment overrides any configured base seed."""
    env_seed = load_settings().seed
    if env_seed is not None:
        return env_seed
    return DEFAULT_SEED if base_seed is None else int(base_seed)
