"""Locate bundled fixture inputs (sample bytecode, contracts, corpora)."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

ENV_FIXTURE_ROOT = "PHANTOMSCAN_FIXTURES"


def fixture_root() -> Path:
    """Directory holding the bundled fixtures; overridable via the environment."""
    override = os.environ.get(ENV_FIXTURE_ROOT)
    if override:
        return Path(override)
    return Path(str(resources.files("phantomscan") / "fixtures"))


def fixture_path(name: str) -> Path:
    path = fixture_root() / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r} under {fixture_root()}")
    return path
