"""Run configuration: one JSON document plus command-line overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import pandas as pd

from .errors import ConfigError, format_location
from .schema import load_schema, parse_document, read_document, validate_document

CONFIG_SCHEMA = "config.schema.json"
DEFAULT_OUTPUT_DIR = "heatcurve-output"
PATH_KEYS = ("demand", "weather", "building", "u_values", "valves", "reference_curve")


def _config_error(message: str, path: Any, line: int | None, column: int | None) -> ConfigError:
    return ConfigError(format_location(message, path, line, column))


@dataclass(slots=True)
class RunConfig:
    paths: dict[str, Path] = field(default_factory=dict)
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    n_cluster: int = 1
    seed: int = 0
    bin_width_K: float = 1.0
    min_samples: int = 6
    hallway_assumed_t_sup_C: float = 45.0
    exponent_n: float = 1.3
    safety_offset_K: float = 0.0
    output_range: tuple[float, float] = (-15.0, 20.0)
    sg_window: int = 7
    sg_polyorder: int = 2
    heater_split: str = "equal"
    loads_solver: str = "closed"
    clamp_negative: bool = False
    utc_offset_minutes: int = 0
    max_weather_gap_minutes: float = 180.0
    missing_pair_tolerance: float = 0.2
    saturation_threshold_pct: float = 99.0
    elbow_k_max: int = 6
    compare_range: tuple[float, float] = (-7.0, 15.0)
    experiment_range: tuple[pd.Timestamp, pd.Timestamp] | None = None
    reference_range: tuple[pd.Timestamp, pd.Timestamp] | None = None

    def path(self, key: str) -> Path:
        """Return the configured input *key* or raise a :class:`ConfigError`."""

        if key not in self.paths:
            raise ConfigError(f"no {key.replace('_', ' ')} file configured (paths.{key})")
        return self.paths[key]

    def validate(self) -> "RunConfig":
        if not 1 <= self.n_cluster <= 144:
            raise ConfigError(f"n_cluster must be within 1..144, got {self.n_cluster}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.bin_width_K <= 0:
            raise ConfigError(f"bin_width_K must be positive, got {self.bin_width_K}")
        if self.min_samples < 1:
            raise ConfigError(f"min_samples must be at least 1, got {self.min_samples}")
        if not 1.0 <= self.exponent_n <= 1.6:
            raise ConfigError(f"exponent_n must be within 1.0..1.6, got {self.exponent_n}")
        if self.sg_window < 1 or self.sg_window % 2 == 0:
            raise ConfigError(f"sg_window must be a positive odd integer, got {self.sg_window}")
        if not 0 <= self.sg_polyorder < self.sg_window:
            raise ConfigError(f"sg_polyorder must be below sg_window, got {self.sg_polyorder}")
        for name in ("output_range", "compare_range", "experiment_range", "reference_range"):
            bounds = getattr(self, name)
            if bounds is not None and not bounds[0] < bounds[1]:
                raise ConfigError(f"{name} must be increasing, got {bounds[0]} .. {bounds[1]}")
        if self.utc_offset_minutes % 10:
            raise ConfigError(f"utc_offset_minutes must be a multiple of 10, got {self.utc_offset_minutes}")
        if self.heater_split not in {"equal", "capacity"}:
            raise ConfigError(f"heater_split must be 'equal' or 'capacity', got {self.heater_split!r}")
        if self.loads_solver not in {"closed", "dense"}:
            raise ConfigError(f"loads_solver must be 'closed' or 'dense', got {self.loads_solver!r}")
        for key, path in self.paths.items():
            if not path.is_file():
                raise ConfigError(f"{key} file not found: {path}")
        return self


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a run configuration; relative paths resolve against its directory."""

    config_path = Path(path)
    try:
        content = read_document(config_path, error=_config_error)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {config_path}") from exc

    data = parse_document(content, error=_config_error)
    validate_document(data, load_schema(CONFIG_SCHEMA), content, error=_config_error)
    return config_from_dict(data, base_dir=config_path.parent)


def config_from_dict(data: Mapping[str, Any], *, base_dir: Path = Path(".")) -> RunConfig:
    values: dict[str, Any] = {
        key: value for key, value in data.items() if key not in {"paths", "output_dir"}
    }
    for key in ("output_range", "compare_range"):
        if key in values:
            values[key] = (float(values[key][0]), float(values[key][1]))
    for key in ("experiment_range", "reference_range"):
        if key in values:
            values[key] = parse_time_range(values[key])

    paths = {key: _resolve(base_dir, value) for key, value in data.get("paths", {}).items()}
    output_dir = _resolve(base_dir, data.get("output_dir", DEFAULT_OUTPUT_DIR))
    return RunConfig(paths=paths, output_dir=output_dir, **values).validate()


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Return *config* with every non-``None`` override applied; flags win over the file."""

    changes = {key: value for key, value in overrides.items() if value is not None}
    if "output_range" in changes:
        low, high = changes["output_range"]
        changes["output_range"] = (float(low), float(high))
    for key in ("experiment_range", "reference_range"):
        if key in changes:
            changes[key] = parse_time_range(changes[key])
    return dataclasses.replace(config, **changes).validate()


def parse_time_range(bounds: Any) -> tuple[pd.Timestamp, pd.Timestamp]:
    try:
        start, end = (pd.Timestamp(value) for value in bounds)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid time range {bounds!r}: {exc}") from exc
    start = start.tz_localize("UTC") if start.tzinfo is None else start.tz_convert("UTC")
    end = end.tz_localize("UTC") if end.tzinfo is None else end.tz_convert("UTC")
    return start, end


def _resolve(base_dir: Path, value: str | Path) -> Path:
    candidate = Path(value).expanduser()
    return candidate if candidate.is_absolute() else base_dir / candidate


__all__ = ["PATH_KEYS", "RunConfig", "apply_overrides", "config_from_dict", "load_config", "parse_time_range"]
