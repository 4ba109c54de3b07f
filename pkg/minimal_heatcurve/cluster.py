"""Time-of-day clustering of the 144 daily 10-minute intervals."""
from __future__ import annotations

import logging
from datetime import datetime
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn.cluster import kmeans_plusplus
from sklearn.preprocessing import StandardScaler

from .errors import DegenerateClusteringError, FeatureError
from .logger import get_logger, log_event
from .models import (
    FEATURE_NAMES,
    INTERVALS_PER_DAY,
    AlignedSeries,
    ClusterModel,
    IntervalFeatures,
    interval_of_day,
)

LOGGER = get_logger("cluster")

MAX_ITERATIONS = 300


def compute_features(series: AlignedSeries) -> list[IntervalFeatures]:
    """Per interval-of-day demand statistics over every observed day.

    Quantiles interpolate linearly between order statistics.
    """

    if len(series) < INTERVALS_PER_DAY:
        raise FeatureError(
            f"series covers {len(series)} interval(s); at least one full day ({INTERVALS_PER_DAY}) is required"
        )

    frame = pd.DataFrame({"interval": series.intervals_of_day(), "demand": series.demand}).dropna()
    grouped = frame.groupby("interval")["demand"]
    stats = grouped.agg(["mean", "max", "count"]).reindex(range(INTERVALS_PER_DAY))
    quantiles = grouped.quantile([0.1, 0.9]).unstack().reindex(range(INTERVALS_PER_DAY))

    empty = stats.index[stats["count"].isna()]
    if len(empty):
        interval = int(empty[0])
        raise FeatureError(
            f"interval {interval} ({_clock(interval)}) has no demand samples",
            interval=interval,
        )

    return [
        IntervalFeatures(
            interval_index=int(interval),
            mean_kW=float(row["mean"]),
            q90_kW=float(quantiles.loc[interval, 0.9]),
            q10_kW=float(quantiles.loc[interval, 0.1]),
            sample_count=int(row["count"]),
            max_kW=float(row["max"]),
        )
        for interval, row in stats.iterrows()
    ]


def kmeans_fit(
    features: Sequence[IntervalFeatures],
    n_cluster: int,
    seed: int = 0,
    *,
    utc_offset_minutes: int = 0,
    max_iterations: int = MAX_ITERATIONS,
) -> ClusterModel:
    """Cluster the intervals with k-means++ seeding and Lloyd iterations.

    Features are standardised first; zero-variance features carry no
    information and are dropped (left at zero) when ``n_cluster > 1``. Cluster
    ids are renumbered in order of first appearance over the day so that
    interval 0 always belongs to cluster 0.
    """

    if not 1 <= n_cluster <= INTERVALS_PER_DAY:
        raise DegenerateClusteringError(f"n_cluster must be within 1..{INTERVALS_PER_DAY}, got {n_cluster}")

    ordered = sorted(features, key=lambda item: item.interval_index)
    if [item.interval_index for item in ordered] != list(range(INTERVALS_PER_DAY)):
        raise FeatureError(f"expected features for all {INTERVALS_PER_DAY} intervals")

    raw = np.array([item.vector() for item in ordered], dtype=float)
    scaler = StandardScaler().fit(raw)
    points = scaler.transform(raw)
    zero_variance = scaler.var_ == 0.0
    points[:, zero_variance] = 0.0

    dropped: tuple[str, ...] = ()
    if n_cluster > 1 and zero_variance.any():
        dropped = tuple(name for name, flag in zip(FEATURE_NAMES, zero_variance) if flag)
        log_event(
            LOGGER,
            level=logging.WARNING,
            action="cluster.drop_feature",
            message=f"Dropped zero-variance feature(s): {', '.join(dropped)}",
        )

    distinct = len(np.unique(points, axis=0))
    if n_cluster > distinct:
        raise DegenerateClusteringError(
            f"n_cluster={n_cluster} exceeds the {distinct} distinct feature point(s)"
        )

    if n_cluster == 1:
        labels = np.zeros(INTERVALS_PER_DAY, dtype=int)
        centers = points.mean(axis=0, keepdims=True)
        history = [float(((points - centers) ** 2).sum())]
    else:
        labels, centers, history = _lloyd(points, n_cluster, seed, max_iterations)
        labels, centers = _relabel_by_first_appearance(labels, centers)

    if len(np.unique(labels)) != n_cluster:
        raise DegenerateClusteringError(f"k-means left empty cluster(s) for n_cluster={n_cluster}")

    scaling = tuple(
        (float(mean), float(np.sqrt(var))) for mean, var in zip(scaler.mean_, scaler.var_)
    )
    model = ClusterModel(
        n_cluster=n_cluster,
        assignment=tuple(int(label) for label in labels),
        centroids=centers,
        feature_scaling=scaling,
        seed=seed,
        wcss_history=tuple(history),
        dropped_features=dropped,
        utc_offset_minutes=utc_offset_minutes,
    )
    log_event(
        LOGGER,
        level=logging.INFO,
        action="cluster.fit",
        message=f"Fitted {n_cluster} cluster(s) in {len(history)} iteration(s)",
        extra={"wcss": history[-1], "seed": seed},
    )
    return model


def cluster_of(model: ClusterModel, timestamp: datetime | pd.Timestamp) -> int:
    return model.assignment[interval_of_day(timestamp, model.utc_offset_minutes)]


def elbow_scores(features: Sequence[IntervalFeatures], k_max: int, seed: int = 0) -> list[tuple[int, float]]:
    """Final WCSS for k = 1..k_max, stopping at the number of distinct points."""

    scores: list[tuple[int, float]] = []
    for k in range(1, k_max + 1):
        try:
            model = kmeans_fit(features, k, seed)
        except DegenerateClusteringError:
            break
        scores.append((k, model.wcss_history[-1]))
    return scores


def quantile_table(features: Sequence[IntervalFeatures], model: ClusterModel | None = None) -> pd.DataFrame:
    """Per-interval statistics (and cluster id) behind the consumption-by-time-of-day plot."""

    rows = []
    for item in sorted(features, key=lambda feature: feature.interval_index):
        row: dict[str, Any] = {
            "interval": item.interval_index,
            "time_of_day": _clock(item.interval_index),
            "max_kW": item.max_kW,
            "q90_kW": item.q90_kW,
            "mean_kW": item.mean_kW,
            "q10_kW": item.q10_kW,
            "sample_count": item.sample_count,
        }
        if model is not None:
            row["cluster"] = model.assignment[item.interval_index]
        rows.append(row)
    return pd.DataFrame(rows)


def model_to_dict(model: ClusterModel) -> dict[str, Any]:
    return {
        "n_cluster": model.n_cluster,
        "seed": model.seed,
        "utc_offset_minutes": model.utc_offset_minutes,
        "assignment": list(model.assignment),
        "centroids": model.centroids.tolist(),
        "feature_names": list(FEATURE_NAMES),
        "feature_scaling": [{"mean": mean, "std": std} for mean, std in model.feature_scaling],
        "dropped_features": list(model.dropped_features),
        "wcss_history": list(model.wcss_history),
    }


def model_from_dict(payload: Mapping[str, Any]) -> ClusterModel:
    return ClusterModel(
        n_cluster=int(payload["n_cluster"]),
        assignment=tuple(int(label) for label in payload["assignment"]),
        centroids=np.asarray(payload["centroids"], dtype=float),
        feature_scaling=tuple((float(item["mean"]), float(item["std"])) for item in payload["feature_scaling"]),
        seed=int(payload["seed"]),
        wcss_history=tuple(float(value) for value in payload.get("wcss_history", [])),
        dropped_features=tuple(payload.get("dropped_features", [])),
        utc_offset_minutes=int(payload.get("utc_offset_minutes", 0)),
    )


def single_cluster_model(*, utc_offset_minutes: int = 0) -> ClusterModel:
    """The trivial model that puts every interval in cluster 0."""

    return ClusterModel(
        n_cluster=1,
        assignment=(0,) * INTERVALS_PER_DAY,
        centroids=np.zeros((1, len(FEATURE_NAMES))),
        feature_scaling=tuple((0.0, 0.0) for _ in FEATURE_NAMES),
        seed=0,
        utc_offset_minutes=utc_offset_minutes,
    )


# -- helpers ------------------------------------------------------------


def _lloyd(
    points: np.ndarray,
    n_cluster: int,
    seed: int,
    max_iterations: int,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    centers, _ = kmeans_plusplus(points, n_clusters=n_cluster, random_state=seed)
    labels: np.ndarray | None = None
    history: list[float] = []

    for _ in range(max_iterations):
        distances = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = distances.argmin(axis=1)
        history.append(float(distances[np.arange(len(points)), new_labels].sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centers = _update_centers(points, labels, centers, distances)

    assert labels is not None
    distances = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return labels, _update_centers(points, labels, centers, distances), history


def _update_centers(
    points: np.ndarray,
    labels: np.ndarray,
    previous: np.ndarray,
    distances: np.ndarray,
) -> np.ndarray:
    centers = previous.copy()
    own_distance = distances[np.arange(len(points)), labels].copy()
    for cluster in range(len(previous)):
        members = labels == cluster
        if members.any():
            centers[cluster] = points[members].mean(axis=0)
            continue
        # empty cluster: reseed at the point farthest from its own centroid
        farthest = int(own_distance.argmax())
        centers[cluster] = points[farthest]
        own_distance[farthest] = 0.0
    return centers


def _relabel_by_first_appearance(labels: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order: list[int] = []
    for label in labels:
        if int(label) not in order:
            order.append(int(label))
    order.extend(cluster for cluster in range(len(centers)) if cluster not in order)
    mapping = {old: new for new, old in enumerate(order)}
    relabelled = np.array([mapping[int(label)] for label in labels], dtype=int)
    return relabelled, centers[order]


def _clock(interval: int) -> str:
    minutes = interval * 10
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


__all__ = [
    "cluster_of",
    "compute_features",
    "elbow_scores",
    "kmeans_fit",
    "model_from_dict",
    "model_to_dict",
    "quantile_table",
    "single_cluster_model",
]
