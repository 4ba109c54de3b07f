"""Evaluation protocol: reference-window matching and valve-opening statistics."""
from __future__ import annotations

import io
import logging
from datetime import timedelta
from typing import Any, Mapping

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyInputError, MatchError, ParseError, ValveDataError
from .logger import get_logger, log_event
from .models import GRID_STEP_S, AlignedSeries, FiveNumberSummary, ValveStats, WindowMatch

LOGGER = get_logger("evaluate")

DEFAULT_MISSING_PAIR_TOLERANCE = 0.2
DEFAULT_SATURATION_PCT = 99.0
_TIE_TOLERANCE_K = 1e-9
_CHUNK_OFFSETS = 4096


def match_window(
    exp_t_out: AlignedSeries,
    ref_t_out: AlignedSeries,
    *,
    missing_pair_tolerance: float = DEFAULT_MISSING_PAIR_TOLERANCE,
) -> WindowMatch:
    """Find the reference window whose outdoor temperature best matches the experiment.

    Every grid offset of *ref_t_out* is scored by the RMSE over the pairs where
    both temperatures are present. Offsets missing more than
    *missing_pair_tolerance* of their pairs are skipped. Ties go to the
    earliest offset.
    """

    exp = np.asarray(exp_t_out.t_out, dtype=float)
    ref = np.asarray(ref_t_out.t_out, dtype=float)
    length = len(exp)
    if length == 0:
        raise MatchError("experiment trajectory is empty")
    if len(ref) < length:
        raise MatchError(f"reference ({len(ref)} intervals) is shorter than the experiment ({length})")

    windows = sliding_window_view(ref, length)
    rmse = np.full(len(windows), np.inf)
    pairs = np.zeros(len(windows), dtype=int)
    for begin in range(0, len(windows), _CHUNK_OFFSETS):
        diff = windows[begin : begin + _CHUNK_OFFSETS] - exp[None, :]
        present = ~np.isnan(diff)
        count = present.sum(axis=1)
        sse = np.where(present, diff * diff, 0.0).sum(axis=1)
        admissible = (count > 0) & (1.0 - count / length <= missing_pair_tolerance)
        with np.errstate(divide="ignore", invalid="ignore"):
            chunk_rmse = np.sqrt(sse / count)
        rmse[begin : begin + len(diff)] = np.where(admissible, chunk_rmse, np.inf)
        pairs[begin : begin + len(diff)] = count

    if not np.isfinite(rmse).any():
        raise MatchError(
            f"every offset misses more than {missing_pair_tolerance:.0%} of its temperature pairs"
        )

    best = float(rmse.min())
    offset = int(np.flatnonzero(rmse <= best + _TIE_TOLERANCE_K)[0])
    return WindowMatch(
        ref_start=ref_t_out.start + pd.Timedelta(seconds=GRID_STEP_S * offset),
        rmse_K=float(rmse[offset]),
        length=timedelta(seconds=GRID_STEP_S * length),
        offset=offset,
        n_pairs=int(pairs[offset]),
    )


def parse_valves(text: str) -> dict[str, pd.Series]:
    """Parse ``timestamp,heater_id,opening_pct`` CSV into one series per heater."""

    if not text.strip():
        raise EmptyInputError("empty valve input")
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise ParseError.from_tokenizer(exc, "valve CSV") from exc
    if [str(column).strip() for column in frame.columns] != ["timestamp", "heater_id", "opening_pct"]:
        raise ParseError("expected header 'timestamp,heater_id,opening_pct'", line=1)
    frame.index = pd.RangeIndex(2, len(frame) + 2)

    timestamps = pd.to_datetime(frame["timestamp"], utc=True, errors="coerce", format="ISO8601")
    openings = pd.to_numeric(frame["opening_pct"], errors="coerce")
    bad = timestamps.isna() | openings.isna() | (frame["heater_id"].str.strip() == "")
    if bad.any():
        line = int(bad.idxmax())
        raise ParseError("malformed valve row", line=line)
    out_of_range = (openings < 0) | (openings > 100)
    if out_of_range.any():
        line = int(out_of_range.idxmax())
        raise ValveDataError(f"valve opening {openings[line]} outside 0..100 % (line {line})")

    tidy = pd.DataFrame(
        {"heater_id": frame["heater_id"].str.strip(), "opening_pct": openings.astype(float)}
    ).set_index(pd.DatetimeIndex(timestamps))
    result: dict[str, pd.Series] = {}
    for heater_id, group in tidy.groupby("heater_id", sort=True):
        series = group["opening_pct"].sort_index(kind="stable")
        result[str(heater_id)] = series[~series.index.duplicated(keep="last")]
    return result


def valve_stats(
    openings: Mapping[str, pd.Series],
    window: tuple[pd.Timestamp, pd.Timestamp],
    *,
    saturation_threshold_pct: float = DEFAULT_SATURATION_PCT,
) -> ValveStats:
    """Summarise mean valve openings per heater over ``[start, end)``.

    Heaters without samples in the window are excluded with a warning.
    Outliers lie more than 1.5 IQR outside the quartiles of the heater means.
    """

    start, end = window
    if not start < end:
        raise ValveDataError(f"empty evaluation window {start} .. {end}")

    means: dict[str, float] = {}
    excluded: list[str] = []
    for heater_id in sorted(openings):
        series = openings[heater_id]
        inside = series[(series.index >= start) & (series.index < end)]
        if inside.empty:
            excluded.append(heater_id)
            log_event(
                LOGGER,
                level=logging.WARNING,
                action="evaluate.heater_excluded",
                message=f"Heater {heater_id} has no valve samples in the window",
            )
            continue
        means[heater_id] = float(inside.mean())

    if not means:
        raise ValveDataError(f"no heater has valve samples between {start} and {end}")

    values = np.fromiter(means.values(), dtype=float)
    minimum, q1, median, q3, maximum = np.percentile(values, [0, 25, 50, 75, 100])
    summary = FiveNumberSummary(
        min=float(minimum), q1=float(q1), median=float(median), q3=float(q3), max=float(maximum)
    )
    low_fence = summary.q1 - 1.5 * summary.iqr
    high_fence = summary.q3 + 1.5 * summary.iqr
    return ValveStats(
        means=means,
        summary=summary,
        outliers=tuple(key for key, value in means.items() if value < low_fence or value > high_fence),
        saturated=tuple(key for key, value in means.items() if value >= saturation_threshold_pct),
        excluded=tuple(excluded),
        window=(start, end),
    )


def compare_valve_stats(experiment: ValveStats, reference: ValveStats) -> dict[str, Any]:
    """Side-by-side summary of the experiment window against the matched reference window."""

    return {
        "experiment": stats_to_dict(experiment),
        "reference": stats_to_dict(reference),
        "median_delta_pct": experiment.summary.median - reference.summary.median,
        "iqr_delta_pct": experiment.summary.iqr - reference.summary.iqr,
        "saturated_delta": len(experiment.saturated) - len(reference.saturated),
    }


def match_to_dict(match: WindowMatch) -> dict[str, Any]:
    return {
        "ref_start": match.ref_start.isoformat(),
        "ref_end": (match.ref_start + match.length).isoformat(),
        "rmse_K": match.rmse_K,
        "length_s": int(match.length.total_seconds()),
        "offset": match.offset,
        "n_pairs": match.n_pairs,
    }


def stats_to_dict(stats: ValveStats) -> dict[str, Any]:
    summary = stats.summary
    return {
        "window": [stats.window[0].isoformat(), stats.window[1].isoformat()] if stats.window else None,
        "heaters": len(stats.means),
        "summary": {
            "min": summary.min,
            "q1": summary.q1,
            "median": summary.median,
            "q3": summary.q3,
            "max": summary.max,
            "iqr": summary.iqr,
        },
        "outliers": list(stats.outliers),
        "saturated": list(stats.saturated),
        "excluded": list(stats.excluded),
    }


def valve_table(stats: ValveStats) -> pd.DataFrame:
    rows = [
        {
            "heater_id": heater_id,
            "mean_opening_pct": mean,
            "outlier": heater_id in stats.outliers,
            "saturated": heater_id in stats.saturated,
        }
        for heater_id, mean in stats.means.items()
    ]
    return pd.DataFrame(rows, columns=["heater_id", "mean_opening_pct", "outlier", "saturated"])


__all__ = [
    "compare_valve_stats",
    "match_to_dict",
    "match_window",
    "parse_valves",
    "stats_to_dict",
    "valve_stats",
    "valve_table",
]
