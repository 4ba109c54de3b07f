"""Quantile demand model per cluster and outdoor-temperature bin."""
from __future__ import annotations

import logging
from typing import Any, Mapping

import numpy as np
import pandas as pd

from .errors import DemandModelError
from .logger import get_logger, log_event
from .models import INTERVALS_PER_DAY, AlignedSeries, ClusterModel, DemandCell, DemandModel, interval_of_day

LOGGER = get_logger("demand")

DEMAND_QUANTILE = 0.9


def bin_index(t_out: float | np.ndarray, bin_width: float) -> np.ndarray:
    """Round ``t_out / bin_width`` half away from zero."""

    scaled = np.asarray(t_out, dtype=float) / bin_width
    return (np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)).astype(int)


def fit_demand(
    series: AlignedSeries,
    clusters: ClusterModel,
    bin_width: float = 1.0,
    min_samples: int = 6,
) -> DemandModel:
    """Fit the 90%-quantile demand for every populated (cluster, bin) cell.

    Intervals missing either demand or outdoor temperature are skipped. Cells
    with fewer than *min_samples* samples are left out of the model.
    """

    if bin_width <= 0:
        raise DemandModelError(f"bin_width must be positive, got {bin_width}")
    if min_samples < 1:
        raise DemandModelError(f"min_samples must be at least 1, got {min_samples}")

    observed = ~(np.isnan(series.demand) | np.isnan(series.t_out))
    if not observed.any():
        raise DemandModelError("no interval has both demand and outdoor temperature")

    first = interval_of_day(series.start, clusters.utc_offset_minutes)
    slots = (first + np.arange(len(series))) % INTERVALS_PER_DAY
    assignment = np.asarray(clusters.assignment)

    frame = pd.DataFrame(
        {
            "cluster": assignment[slots][observed],
            "bin": bin_index(series.t_out[observed], bin_width),
            "demand": series.demand[observed],
        }
    )
    grouped = frame.groupby(["cluster", "bin"])["demand"]
    stats = pd.DataFrame({"q90": grouped.quantile(DEMAND_QUANTILE), "n": grouped.size()})
    kept = stats[stats["n"] >= min_samples]
    if kept.empty:
        raise DemandModelError(
            f"every (cluster, temperature) cell has fewer than {min_samples} samples"
        )

    cells: dict[int, dict[int, DemandCell]] = {cluster: {} for cluster in range(clusters.n_cluster)}
    for (cluster, index), row in kept.iterrows():
        cells[int(cluster)][int(index)] = DemandCell(q90_demand_kW=float(row["q90"]), sample_count=int(row["n"]))

    t_out = series.t_out[observed]
    model = DemandModel(
        bin_width_K=bin_width,
        min_samples=min_samples,
        n_cluster=clusters.n_cluster,
        cells=cells,
        t_out_range=(float(t_out.min()), float(t_out.max())),
    )
    log_event(
        LOGGER,
        level=logging.INFO,
        action="demand.fit",
        message=f"Fitted {len(kept)} demand cell(s), {len(stats) - len(kept)} below min_samples",
        extra={"samples": int(observed.sum()), "binWidthK": bin_width},
    )
    return model


def query_demand(model: DemandModel, cluster: int, t_out: float) -> float | None:
    """Return the q90 demand (kW) of the bin containing *t_out*, or ``None`` for a gap."""

    cell = model.cells.get(cluster, {}).get(int(bin_index(t_out, model.bin_width_K)))
    return None if cell is None else cell.q90_demand_kW


def demand_table(model: DemandModel) -> pd.DataFrame:
    rows = [
        {"cluster": cluster, "t_out_bin": t_out, "q90_kW": cell.q90_demand_kW, "n": cell.sample_count}
        for cluster, t_out, cell in model.iter_cells()
    ]
    return pd.DataFrame(rows, columns=["cluster", "t_out_bin", "q90_kW", "n"])


def model_to_dict(model: DemandModel) -> dict[str, Any]:
    return {
        "bin_width_K": model.bin_width_K,
        "min_samples": model.min_samples,
        "n_cluster": model.n_cluster,
        "t_out_range": list(model.t_out_range),
        "cells": [
            {
                "cluster": cluster,
                "bin": bin_index_,
                "t_out_C": model.bin_center(bin_index_),
                "q90_kW": cell.q90_demand_kW,
                "n": cell.sample_count,
            }
            for cluster in sorted(model.cells)
            for bin_index_, cell in sorted(model.cells[cluster].items())
        ],
    }


def model_from_dict(payload: Mapping[str, Any]) -> DemandModel:
    n_cluster = int(payload["n_cluster"])
    cells: dict[int, dict[int, DemandCell]] = {cluster: {} for cluster in range(n_cluster)}
    for item in payload["cells"]:
        cells.setdefault(int(item["cluster"]), {})[int(item["bin"])] = DemandCell(
            q90_demand_kW=float(item["q90_kW"]), sample_count=int(item["n"])
        )
    low, high = payload["t_out_range"]
    return DemandModel(
        bin_width_K=float(payload["bin_width_K"]),
        min_samples=int(payload["min_samples"]),
        n_cluster=n_cluster,
        cells=cells,
        t_out_range=(float(low), float(high)),
    )


__all__ = [
    "bin_index",
    "demand_table",
    "fit_demand",
    "model_from_dict",
    "model_to_dict",
    "query_demand",
]
