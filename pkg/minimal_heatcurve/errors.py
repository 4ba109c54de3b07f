"""Exception hierarchy shared by all pipeline stages.

Every error carries the CLI exit code it maps to and the module it was raised
from, so the command line can print ``[module] message`` and exit accordingly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3

_TOKENIZER_LINE = re.compile(r" in line (\d+)")


class HeatcurveError(Exception):
    """Base class for every expected pipeline failure."""

    exit_code: int = EXIT_DATA
    module: str = "pipeline"

    def qualified(self) -> str:
        return f"[{self.module}] {self}"


class ConfigError(HeatcurveError):
    exit_code = EXIT_CONFIG
    module = "config"


class DataError(HeatcurveError):
    exit_code = EXIT_DATA


class ParseError(DataError):
    module = "ingest"

    def __init__(self, message: str, *, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)

    @classmethod
    def from_tokenizer(cls, exc: Exception, what: str) -> "ParseError":
        """Wrap a CSV tokenizer failure, lifting its ``line N`` into :attr:`line`."""

        reason = str(exc).split("C error: ")[-1].strip()
        match = _TOKENIZER_LINE.search(reason)
        line = int(match.group(1)) if match else None
        reason = _TOKENIZER_LINE.sub("", reason)
        return cls(f"malformed {what}: {reason}", line=line)


class EmptyInputError(DataError):
    module = "ingest"


class AlignmentError(DataError):
    module = "ingest"


class FeatureError(DataError):
    module = "cluster"

    def __init__(self, message: str, *, interval: int | None = None) -> None:
        self.interval = interval
        super().__init__(message)


class DegenerateClusteringError(DataError):
    module = "cluster"


class DemandModelError(DataError):
    module = "demand"


class LmtdDomainError(DataError):
    module = "lmtd"


class CurveError(DataError):
    module = "heatcurve"


class MatchError(DataError):
    module = "evaluate"


class ValveDataError(DataError):
    module = "evaluate"


@dataclass(slots=True)
class BuildingValidationError(HeatcurveError):
    """Raised when a building or U-value document violates schema or invariants."""

    message: str
    path: tuple[str | int, ...] | None = None
    line: int | None = None
    column: int | None = None

    exit_code = EXIT_CONFIG
    module = "building"

    def __str__(self) -> str:
        return format_location(self.message, self.path, self.line, self.column)


def format_location(
    message: str,
    path: tuple[str | int, ...] | None,
    line: int | None = None,
    column: int | None = None,
) -> str:
    """Render ``message at $.rooms[0].id (line 3, column 7)``."""

    pointer = ""
    if path:
        pointer = " at $" + "".join(
            f"[{part}]" if isinstance(part, int) else f".{part}" for part in path
        )
    location = ""
    if line is not None:
        location = f" (line {line}, column {column or 1})"
    return f"{message}{pointer}{location}"


class BuildingConfigurationError(HeatcurveError):
    """A valid building that cannot be evaluated (heaterless room, orphan hallway)."""

    exit_code = EXIT_CONFIG
    module = "loads"


class InfeasibleAllocationError(HeatcurveError):
    exit_code = EXIT_INFEASIBLE
    module = "loads"


__all__ = [
    "AlignmentError",
    "BuildingConfigurationError",
    "BuildingValidationError",
    "ConfigError",
    "CurveError",
    "DataError",
    "DegenerateClusteringError",
    "DemandModelError",
    "EXIT_CONFIG",
    "EXIT_DATA",
    "EXIT_INFEASIBLE",
    "EXIT_OK",
    "EmptyInputError",
    "FeatureError",
    "HeatcurveError",
    "InfeasibleAllocationError",
    "LmtdDomainError",
    "MatchError",
    "ParseError",
    "ValveDataError",
    "format_location",
]
