"""Access to the bundled benchmark scenarios."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def corpus_dir() -> Path:
    return Path(str(resources.files(__package__) / "corpus"))


def list_scenarios() -> list:
    """(name, path) pairs for every bundled scenario, sorted by name."""
    return sorted((p.stem, p) for p in corpus_dir().glob("*.scn"))


def corpus_path(name: str) -> Path:
    path = corpus_dir() / f"{name}.scn"
    if not path.exists():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return path
