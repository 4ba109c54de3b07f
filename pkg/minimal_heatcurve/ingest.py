"""Parse, validate and align meter and weather series onto the 10-minute grid."""
from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import TextIO

import numpy as np
import pandas as pd

from .errors import AlignmentError, EmptyInputError, ParseError
from .logger import get_logger, log_event
from .models import GRID_FREQ, GRID_STEP_S, AlignedSeries, RawSeries, SeriesKind
from .utils.fs import text_position

LOGGER = get_logger("ingest")

_EPOCH = pd.Timestamp(0, tz="UTC")
_STEP = pd.Timedelta(seconds=GRID_STEP_S)
DEFAULT_MAX_WEATHER_GAP_MINUTES = 180


def parse_series(
    text: str | TextIO,
    kind: SeriesKind,
    *,
    clamp_negative: bool = False,
) -> RawSeries:
    """Parse a ``timestamp,value`` CSV into a :class:`RawSeries`.

    Timestamps are ISO-8601; naive timestamps are read as UTC. Rows are sorted
    and duplicate timestamps collapse to their last occurrence in the file.
    Negative heat-power readings raise :class:`ParseError` unless
    *clamp_negative* is set, in which case they are zeroed.
    """

    content = text if isinstance(text, str) else text.read()
    if not content.strip():
        raise EmptyInputError(f"empty {kind.value} input")

    try:
        frame = pd.read_csv(
            io.StringIO(content),
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            skipinitialspace=True,
        )
    except pd.errors.ParserError as exc:
        raise ParseError.from_tokenizer(exc, f"{kind.value} CSV") from exc

    columns = [str(column).strip() for column in frame.columns]
    if columns != ["timestamp", "value"]:
        raise ParseError(f"expected header 'timestamp,value', got {','.join(columns)!r}", line=1)

    # data rows start on line 2; fully blank lines are tolerated
    frame.index = pd.RangeIndex(2, len(frame) + 2)
    frame = frame.fillna("")
    frame = frame[(frame["timestamp"].str.strip() != "") | (frame["value"].str.strip() != "")]
    if frame.empty:
        raise EmptyInputError(f"no data rows in {kind.value} input")

    timestamps = pd.to_datetime(frame["timestamp"], utc=True, errors="coerce", format="ISO8601")
    values = pd.to_numeric(frame["value"], errors="coerce")
    bad = timestamps.isna() | values.isna() | ~np.isfinite(values.fillna(0.0))
    if bad.any():
        line = int(bad[bad].index[0])
        raise ParseError(
            f"malformed row {frame.loc[line, 'timestamp']!r},{frame.loc[line, 'value']!r}",
            line=line,
        )

    if kind is SeriesKind.HEAT_POWER:
        negative = values < 0
        if negative.any():
            if not clamp_negative:
                line = int(negative[negative].index[0])
                raise ParseError(f"negative heat power {values[line]}", line=line)
            log_event(
                LOGGER,
                level=logging.WARNING,
                action="ingest.clamp_negative",
                message=f"Zeroed {int(negative.sum())} negative heat-power reading(s)",
            )
            values = values.clip(lower=0.0)

    series = pd.Series(values.to_numpy(dtype=float), index=pd.DatetimeIndex(timestamps), name=kind.value)
    series = series.sort_index(kind="stable")
    series = series[~series.index.duplicated(keep="last")]
    return RawSeries(kind=kind, values=series)


def read_csv_text(path: str | Path) -> str:
    """Decode a UTF-8 input file; undecodable bytes raise :class:`ParseError`."""

    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line, column = text_position(raw, exc.start)
        raise ParseError(f"{path}: invalid UTF-8 byte at column {column}", line=line) from exc


def read_series(path: str | Path, kind: SeriesKind, *, clamp_negative: bool = False) -> RawSeries:
    return parse_series(read_csv_text(path), kind, clamp_negative=clamp_negative)


def align(
    demand: RawSeries,
    weather: RawSeries,
    *,
    utc_offset_minutes: int = 0,
    max_weather_gap_minutes: float = DEFAULT_MAX_WEATHER_GAP_MINUTES,
) -> AlignedSeries:
    """Resample *demand* and *weather* onto a shared 10-minute grid over their overlap.

    Demand becomes the mean of the samples inside each interval (``NaN`` when
    none); outdoor temperature is linearly interpolated at each interval start.
    """

    if len(demand) == 0 or len(weather) == 0:
        raise AlignmentError("both series must be non-empty")

    overlap_start = max(demand.first, weather.first)
    overlap_end = min(demand.last, weather.last)
    if overlap_start > overlap_end:
        raise AlignmentError(
            f"no overlap between demand ({demand.first} .. {demand.last}) "
            f"and weather ({weather.first} .. {weather.last})"
        )

    grid_start = overlap_start.ceil(GRID_FREQ)
    last_start = overlap_end.floor(GRID_FREQ)
    if grid_start > last_start:
        raise AlignmentError("overlap is shorter than one 10-minute interval")
    grid = pd.date_range(grid_start, last_start, freq=GRID_FREQ)

    aligned = AlignedSeries(
        start=grid_start,
        demand=_interval_means(demand.values, grid),
        t_out=_interpolate(weather.values, grid, max_weather_gap_minutes),
        utc_offset_minutes=utc_offset_minutes,
    )
    log_event(
        LOGGER,
        level=logging.INFO,
        action="ingest.align",
        message=f"Aligned {len(aligned)} interval(s) starting {grid_start.isoformat()}",
        extra={
            "missingDemand": int(np.isnan(aligned.demand).sum()),
            "missingTOut": int(np.isnan(aligned.t_out).sum()),
        },
    )
    return aligned


def align_weather(
    weather: RawSeries,
    *,
    start: pd.Timestamp | None = None,
    end: pd.Timestamp | None = None,
    utc_offset_minutes: int = 0,
    max_weather_gap_minutes: float = DEFAULT_MAX_WEATHER_GAP_MINUTES,
) -> AlignedSeries:
    """Put a temperature trajectory on the grid; demand is all missing.

    *start* and *end* (inclusive) restrict the trajectory to a sub-range.
    """

    if len(weather) == 0:
        raise AlignmentError("weather series is empty")
    lower = max(weather.first, _as_utc(start)) if start is not None else weather.first
    upper = min(weather.last, _as_utc(end)) if end is not None else weather.last
    grid_start = lower.ceil(GRID_FREQ)
    last_start = upper.floor(GRID_FREQ)
    if grid_start > last_start:
        raise AlignmentError(f"weather does not cover {lower} .. {upper}")
    grid = pd.date_range(grid_start, last_start, freq=GRID_FREQ)
    return AlignedSeries(
        start=grid_start,
        demand=np.full(len(grid), np.nan),
        t_out=_interpolate(weather.values, grid, max_weather_gap_minutes),
        utc_offset_minutes=utc_offset_minutes,
    )


def alignment_report(aligned: AlignedSeries, demand: RawSeries, weather: RawSeries) -> dict[str, object]:
    """Summarise what alignment kept, dropped and marked missing."""

    def outside(series: RawSeries) -> int:
        index = series.values.index
        return int(((index < aligned.start) | (index >= aligned.end)).sum())

    return {
        "start": aligned.start.isoformat(),
        "end": aligned.end.isoformat(),
        "intervals": len(aligned),
        "missing_demand_intervals": int(np.isnan(aligned.demand).sum()),
        "missing_t_out_intervals": int(np.isnan(aligned.t_out).sum()),
        "demand_samples": len(demand),
        "weather_samples": len(weather),
        "demand_samples_dropped": outside(demand),
        "weather_samples_dropped": outside(weather),
        "utc_offset_minutes": aligned.utc_offset_minutes,
    }


def write_aligned(series: AlignedSeries) -> str:
    """Serialise *series* as ``timestamp,demand_kW,t_out_C``; missing values are empty."""

    frame = pd.DataFrame(
        {
            "timestamp": series.index.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "demand_kW": series.demand,
            "t_out_C": series.t_out,
        }
    )
    return frame.to_csv(index=False, na_rep="", float_format="%.10g", lineterminator="\n")


def read_aligned(text: str, *, utc_offset_minutes: int = 0) -> AlignedSeries:
    frame = pd.read_csv(io.StringIO(text))
    if list(frame.columns) != ["timestamp", "demand_kW", "t_out_C"]:
        raise ParseError("expected header 'timestamp,demand_kW,t_out_C'", line=1)
    if frame.empty:
        raise EmptyInputError("aligned series has no rows")
    index = pd.DatetimeIndex(pd.to_datetime(frame["timestamp"], utc=True, format="ISO8601"))
    expected = pd.date_range(index[0], periods=len(index), freq=GRID_FREQ)
    if not index.equals(expected):
        raise ParseError("aligned series is not a contiguous 10-minute grid")
    return AlignedSeries(
        start=index[0],
        demand=frame["demand_kW"].to_numpy(dtype=float),
        t_out=frame["t_out_C"].to_numpy(dtype=float),
        utc_offset_minutes=utc_offset_minutes,
    )


def _as_utc(timestamp: pd.Timestamp) -> pd.Timestamp:
    ts = pd.Timestamp(timestamp)
    return ts.tz_localize("UTC") if ts.tzinfo is None else ts.tz_convert("UTC")


def _seconds(index: pd.DatetimeIndex) -> np.ndarray:
    return (index - _EPOCH).total_seconds().to_numpy(dtype=float)


def _interval_means(values: pd.Series, grid: pd.DatetimeIndex) -> np.ndarray:
    inside = values[(values.index >= grid[0]) & (values.index < grid[-1] + _STEP)]
    if inside.empty:
        return np.full(len(grid), np.nan)
    means = inside.resample(GRID_FREQ, origin="epoch", label="left", closed="left").mean()
    return means.reindex(grid).to_numpy(dtype=float)


def _interpolate(values: pd.Series, grid: pd.DatetimeIndex, max_gap_minutes: float) -> np.ndarray:
    x = _seconds(values.index)
    y = values.to_numpy(dtype=float)
    g = _seconds(grid)
    result = np.interp(g, x, y, left=np.nan, right=np.nan)

    position = np.searchsorted(x, g, side="right")
    left = x[np.clip(position - 1, 0, len(x) - 1)]
    right = x[np.clip(position, 0, len(x) - 1)]
    exact = left == g
    gap = (right - left) > max_gap_minutes * 60.0
    result[gap & ~exact] = np.nan
    return result


__all__ = [
    "align",
    "align_weather",
    "alignment_report",
    "parse_series",
    "read_aligned",
    "read_csv_text",
    "read_series",
    "write_aligned",
]
