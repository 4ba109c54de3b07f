from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from minimal_heatcurve.cluster import (
    cluster_of,
    compute_features,
    elbow_scores,
    kmeans_fit,
    model_from_dict,
    model_to_dict,
    quantile_table,
)
from minimal_heatcurve.errors import DegenerateClusteringError, FeatureError
from minimal_heatcurve.models import INTERVALS_PER_DAY, AlignedSeries

START = pd.Timestamp("2021-01-04T00:00:00Z")
DAY = np.arange(INTERVALS_PER_DAY)
DAYTIME = (DAY >= 36) & (DAY < 108)


def make_series(demand: np.ndarray, *, utc_offset_minutes: int = 0) -> AlignedSeries:
    demand = np.asarray(demand, dtype=float)
    return AlignedSeries(
        start=START,
        demand=demand,
        t_out=np.zeros(len(demand)),
        utc_offset_minutes=utc_offset_minutes,
    )


def two_regime_series(days: int = 14, seed: int = 3) -> AlignedSeries:
    rng = np.random.default_rng(seed)
    pattern = np.where(DAYTIME, 20.0, 5.0)
    demand = np.tile(pattern, days) + rng.normal(0.0, 0.5, size=days * INTERVALS_PER_DAY)
    return make_series(np.clip(demand, 0.0, None))


def _wcss(points: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for label in np.unique(labels):
        members = points[labels == label]
        total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


def test_constant_series_features() -> None:
    features = compute_features(make_series(np.full(2 * INTERVALS_PER_DAY, 10.0)))
    assert len(features) == INTERVALS_PER_DAY
    for item in features:
        assert (item.mean_kW, item.q90_kW, item.q10_kW) == (10.0, 10.0, 10.0)
        assert item.sample_count == 2


def test_feature_quantiles_interpolate_linearly() -> None:
    demand = np.repeat(np.arange(1.0, 11.0), INTERVALS_PER_DAY)
    features = compute_features(make_series(demand))
    for item in features:
        assert item.mean_kW == pytest.approx(5.5)
        assert item.q90_kW == pytest.approx(9.1)
        assert item.q10_kW == pytest.approx(1.9)
        assert item.max_kW == 10.0


def test_features_require_every_interval() -> None:
    demand = np.full(INTERVALS_PER_DAY, 3.0)
    demand[5] = np.nan
    with pytest.raises(FeatureError) as exc:
        compute_features(make_series(demand))
    assert exc.value.interval == 5
    assert "00:50" in str(exc.value)

    with pytest.raises(FeatureError):
        compute_features(make_series(np.ones(100)))


def test_single_cluster_sits_at_the_origin() -> None:
    features = compute_features(two_regime_series())
    model = kmeans_fit(features, 1)
    assert set(model.assignment) == {0}
    np.testing.assert_allclose(model.centroids, np.zeros((1, 3)), atol=1e-12)


def test_constant_series_cannot_split() -> None:
    features = compute_features(make_series(np.full(INTERVALS_PER_DAY, 10.0)))
    assert kmeans_fit(features, 1).n_cluster == 1
    with pytest.raises(DegenerateClusteringError):
        kmeans_fit(features, 2)


@pytest.mark.parametrize("seed", range(10))
def test_two_regimes_are_recovered_for_every_seed(seed: int) -> None:
    features = compute_features(two_regime_series())
    model = kmeans_fit(features, 2, seed)

    assignment = np.array(model.assignment)
    expected = DAYTIME.astype(int)
    np.testing.assert_array_equal(assignment, expected)

    points = np.array([item.vector() for item in features])
    scaled = (points - [mean for mean, _ in model.feature_scaling]) / [std for _, std in model.feature_scaling]
    assert model.wcss_history[-1] == pytest.approx(_wcss(scaled, expected), rel=1e-9)


def test_wcss_never_increases_and_fit_is_deterministic() -> None:
    features = compute_features(two_regime_series(seed=11))
    first = kmeans_fit(features, 4, seed=7)
    second = kmeans_fit(features, 4, seed=7)

    history = np.array(first.wcss_history)
    assert np.all(np.diff(history) <= 1e-9)
    assert first.assignment == second.assignment
    np.testing.assert_array_equal(first.centroids, second.centroids)
    assert first.assignment[0] == 0


def test_cluster_of_uses_local_time() -> None:
    features = compute_features(two_regime_series())
    model = kmeans_fit(features, 2)
    assert cluster_of(model, pd.Timestamp("2021-03-01T12:00:00Z")) == 1
    assert cluster_of(model, pd.Timestamp("2021-03-01T02:00:00Z")) == 0

    shifted = kmeans_fit(features, 2, utc_offset_minutes=120)
    # 05:00 UTC is 07:00 local
    assert cluster_of(shifted, pd.Timestamp("2021-03-01T05:00:00Z")) == 1


def test_more_clusters_than_distinct_points() -> None:
    features = compute_features(make_series(np.tile(np.where(DAYTIME, 8.0, 2.0), 3)))
    assert kmeans_fit(features, 2).n_cluster == 2
    with pytest.raises(DegenerateClusteringError):
        kmeans_fit(features, 3)
    assert [k for k, _ in elbow_scores(features, 6)] == [1, 2]


def test_elbow_scores_drop_with_k() -> None:
    scores = elbow_scores(compute_features(two_regime_series()), 4)
    assert [k for k, _ in scores] == [1, 2, 3, 4]
    assert scores[1][1] < scores[0][1] / 10


def test_model_dict_roundtrip_and_quantile_table() -> None:
    features = compute_features(two_regime_series())
    model = kmeans_fit(features, 2, seed=4)
    restored = model_from_dict(model_to_dict(model))
    assert restored.assignment == model.assignment
    np.testing.assert_array_equal(restored.centroids, model.centroids)

    table = quantile_table(features, model)
    assert list(table.columns) == [
        "interval",
        "time_of_day",
        "max_kW",
        "q90_kW",
        "mean_kW",
        "q10_kW",
        "sample_count",
        "cluster",
    ]
    assert table.loc[36, "time_of_day"] == "06:00"
    assert table.loc[36, "cluster"] == 1
