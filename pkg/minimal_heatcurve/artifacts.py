"""Deterministic CSV/JSON artifact writing into a staged output directory."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import pandas as pd

CSV_FLOAT_FORMAT = "%.10g"


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False, default=_jsonable) + "\n"


def to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


class ArtifactWriter:
    """Write named artifacts into *directory* and remember what was written."""

    def __init__(self, directory: Path) -> None:
        self.directory = directory
        self.written: list[str] = []

    def text(self, name: str, content: str) -> Path:
        path = self.directory / name
        path.write_text(content, encoding="utf-8")
        if name not in self.written:
            self.written.append(name)
        return path

    def json(self, name: str, payload: Any) -> Path:
        return self.text(name, to_json(payload))

    def csv(self, name: str, frame: pd.DataFrame) -> Path:
        return self.text(name, to_csv(frame))


def read_json(path: Path) -> Mapping[str, Any]:
    return json.loads(path.read_text(encoding="utf-8"))


def _jsonable(value: Any) -> Any:
    if isinstance(value, pd.Timestamp):
        return value.isoformat()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "item"):
        return value.item()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


__all__ = ["ArtifactWriter", "read_json", "to_csv", "to_json"]
