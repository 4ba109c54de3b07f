"""Filesystem helpers used by the heatcurve pipeline."""
from __future__ import annotations

import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator


def ensure_directory(path: Path) -> Path:
    """Ensure that *path* exists as a directory and return it."""

    path.mkdir(parents=True, exist_ok=True)
    return path


def text_position(raw: bytes, offset: int) -> tuple[int, int]:
    """1-based line and column of byte *offset* in *raw*."""

    line_start = raw.rfind(b"\n", 0, offset) + 1
    return raw.count(b"\n", 0, offset) + 1, offset - line_start + 1


@contextmanager
def staged_directory(target: Path, *, replaces: Iterable[str] = ()) -> Iterator[Path]:
    """Yield a scratch directory whose files are moved into *target* on success.

    The scratch directory lives next to *target* so the final moves are
    same-filesystem renames. *replaces* names files of an earlier run; those
    not written again are removed from *target*. On any exception the scratch
    directory is removed and *target* is left untouched.
    """

    parent = ensure_directory(target.parent if target.parent != target else Path("."))
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.staging-", dir=parent))
    try:
        yield staging
        ensure_directory(target)
        fresh = {item.name for item in staging.iterdir()}
        for name in sorted({Path(name).name for name in replaces} - fresh):
            stale = target / name
            if stale.is_file():
                stale.unlink()
        for item in sorted(staging.iterdir()):
            os.replace(item, target / item.name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)


__all__ = ["ensure_directory", "staged_directory", "text_position"]
