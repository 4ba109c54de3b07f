"""End-to-end orchestration shared by the command-line subcommands."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd

from . import building as building_module
from . import cluster as cluster_module
from . import demand as demand_module
from . import evaluate as evaluate_module
from . import heatcurve as heatcurve_module
from . import ingest as ingest_module
from .artifacts import ArtifactWriter, read_json
from .config import RunConfig
from .errors import ConfigError
from .logger import get_logger, timed
from .models import (
    AlignedSeries,
    BuildingModel,
    ClusterModel,
    DemandModel,
    Heatcurve,
    IntervalFeatures,
    RawSeries,
    SeriesKind,
)
from .reporting import build_summary
from .utils.fs import staged_directory

LOGGER = get_logger("pipeline")

SUMMARY_NAME = "summary.json"


@dataclass(slots=True)
class IngestResult:
    aligned: AlignedSeries
    demand: RawSeries
    weather: RawSeries


class Pipeline:
    """Lazily runs each stage once and keeps its result for the later stages."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self._ingest: IngestResult | None = None
        self._cluster: tuple[list[IntervalFeatures], ClusterModel] | None = None
        self._demand: DemandModel | None = None
        self._building: tuple[BuildingModel, tuple[float, float, float]] | None = None
        self._builds: dict[int, heatcurve_module.CurveBuild] | None = None
        self._curves: dict[int, Heatcurve] | None = None

    # -- stages ---------------------------------------------------------

    def ingest(self) -> IngestResult:
        if self._ingest is None:
            config = self.config
            demand = ingest_module.read_series(
                config.path("demand"), SeriesKind.HEAT_POWER, clamp_negative=config.clamp_negative
            )
            weather = ingest_module.read_series(config.path("weather"), SeriesKind.OUTDOOR_TEMP)
            aligned = ingest_module.align(
                demand,
                weather,
                utc_offset_minutes=config.utc_offset_minutes,
                max_weather_gap_minutes=config.max_weather_gap_minutes,
            )
            self._ingest = IngestResult(aligned=aligned, demand=demand, weather=weather)
        return self._ingest

    def cluster(self) -> tuple[list[IntervalFeatures], ClusterModel]:
        if self._cluster is None:
            features = cluster_module.compute_features(self.ingest().aligned)
            model = cluster_module.kmeans_fit(
                features,
                self.config.n_cluster,
                self.config.seed,
                utc_offset_minutes=self.config.utc_offset_minutes,
            )
            self._cluster = (features, model)
        return self._cluster

    def demand(self) -> DemandModel:
        if self._demand is None:
            _, model = self.cluster()
            self._demand = demand_module.fit_demand(
                self.ingest().aligned, model, self.config.bin_width_K, self.config.min_samples
            )
        return self._demand

    def building(self) -> tuple[BuildingModel, tuple[float, float, float]]:
        if self._building is None:
            model = building_module.read_building(
                self.config.path("building"), default_exponent_n=self.config.exponent_n
            )
            table = building_module.read_u_ratio_table(self.config.path("u_values"), model.construction_type)
            self._building = (model, building_module.u_ratios(table))
        return self._building

    def builds(self) -> dict[int, heatcurve_module.CurveBuild]:
        if self._builds is None:
            demand = self.demand()
            self._builds = {cluster: self._build_cluster(demand, cluster) for cluster in range(demand.n_cluster)}
        return self._builds

    def _build_cluster(self, demand: DemandModel, cluster: int) -> heatcurve_module.CurveBuild:
        building, ratios = self.building()
        with timed(LOGGER, "heatcurve.build", "Computed heatcurve", cluster=cluster) as details:
            build = heatcurve_module.build_heatcurve(
                demand,
                cluster,
                building,
                ratios,
                hallway_t_sup_C=self.config.hallway_assumed_t_sup_C,
                heater_split=self.config.heater_split,  # type: ignore[arg-type]
                solver=self.config.loads_solver,  # type: ignore[arg-type]
            )
            details["message"] = f"Computed {len(build.curve.computed)} heatcurve point(s)"
        return build

    def curves(self) -> dict[int, Heatcurve]:
        if self._curves is None:
            config = self.config
            self._curves = {
                cluster: heatcurve_module.postprocess(
                    build.curve,
                    config.output_range,
                    config.sg_window,
                    config.sg_polyorder,
                    safety_offset_K=config.safety_offset_K,
                )
                for cluster, build in self.builds().items()
            }
        return self._curves

    # -- artifacts ------------------------------------------------------

    def write_ingest(self, writer: ArtifactWriter) -> dict[str, Any]:
        result = self.ingest()
        report = ingest_module.alignment_report(result.aligned, result.demand, result.weather)
        writer.text("aligned.csv", ingest_module.write_aligned(result.aligned))
        writer.json("alignment_report.json", report)
        return {"alignment": report}

    def write_cluster(self, writer: ArtifactWriter) -> dict[str, Any]:
        features, model = self.cluster()
        writer.json("cluster_model.json", cluster_module.model_to_dict(model))
        writer.csv("quantiles.csv", cluster_module.quantile_table(features, model))
        scores = cluster_module.elbow_scores(features, self.config.elbow_k_max, self.config.seed)
        writer.csv("elbow.csv", pd.DataFrame(scores, columns=["k", "wcss"]))
        sizes = {str(cluster): len(model.members(cluster)) for cluster in range(model.n_cluster)}
        return {"clusters": {"n_cluster": model.n_cluster, "seed": model.seed, "intervals": sizes}}

    def write_demand(self, writer: ArtifactWriter) -> dict[str, Any]:
        model = self.demand()
        writer.json("demand_model.json", demand_module.model_to_dict(model))
        writer.csv("demand.csv", demand_module.demand_table(model))
        return {
            "demand": {
                "cells": sum(1 for _ in model.iter_cells()),
                "t_out_range": list(model.t_out_range),
            }
        }

    def write_loads(self, writer: ArtifactWriter) -> dict[str, Any]:
        building, ratios = self.building()
        builds = self.builds()
        writer.csv("room_loads.csv", heatcurve_module.room_load_table(builds.values()))
        return {
            "building": {
                "building_id": building.building_id,
                "construction_type": building.construction_type,
                "rooms": building.n_rooms,
                "floors": building.n_floors,
                "heaters": sum(1 for _ in building.heaters()),
                "u_ratios": list(ratios),
            }
        }

    def write_heatcurve(self, writer: ArtifactWriter) -> dict[str, Any]:
        config = self.config
        building, _ = self.building()
        builds = self.builds()
        curves = self.curves()

        for cluster, curve in curves.items():
            writer.csv(f"heatcurve_{cluster}.csv", heatcurve_module.heatcurve_table(curve))
            writer.csv(f"automation_{cluster}.csv", heatcurve_module.automation_table(curve))
        writer.csv("heater_requirements.csv", heatcurve_module.requirement_table(builds.values()))
        critical = heatcurve_module.critical_heater_report(builds.values(), building)
        writer.json("critical_heaters.json", critical)

        hallway = {"applicable": bool(building.circulation_rooms()), "clusters": []}
        if hallway["applicable"]:
            hallway["clusters"] = [
                heatcurve_module.verify_hallway_assumption(build.curve, config.hallway_assumed_t_sup_C)
                for build in builds.values()
            ]
        hallway["passed"] = all(item["passed"] for item in hallway["clusters"])
        writer.json("hallway_verification.json", hallway)

        comparison: dict[str, Any] = {}
        if len(curves) > 1:
            comparison["clusters"] = heatcurve_module.compare_clusters(curves, config.compare_range)
        if "reference_curve" in config.paths:
            reference = heatcurve_module.parse_reference_curve(
                ingest_module.read_csv_text(config.path("reference_curve"))
            )
            comparison["reference"] = [
                heatcurve_module.compare_curves(curve, reference, config.compare_range)
                for curve in curves.values()
            ]
        if comparison:
            writer.json("comparison.json", comparison)

        return {
            "curves": {
                str(cluster): {
                    "computed_points": len(curve.computed),
                    "min_t_sup_C": min(curve.points.values()),
                    "max_t_sup_C": max(curve.points.values()),
                    "safety_offset_K": curve.safety_offset_K,
                    "skipped_bins": builds[cluster].skipped,
                }
                for cluster, curve in curves.items()
            },
            "critical_room": critical["critical_room"],
            "hallway_passed": hallway["passed"],
            "comparison": comparison or None,
        }

    def write_evaluate(self, writer: ArtifactWriter) -> dict[str, Any]:
        config = self.config
        valves_path = config.path("valves")
        if config.experiment_range is None:
            raise ConfigError("evaluation needs an experiment range (--exp-range START END)")
        exp_start, exp_end = config.experiment_range

        weather = ingest_module.read_series(config.path("weather"), SeriesKind.OUTDOOR_TEMP)
        ref_start, ref_end = config.reference_range or (weather.first, exp_start)
        just_before = pd.Timedelta(microseconds=1)
        exp = ingest_module.align_weather(
            weather, start=exp_start, end=exp_end - just_before, max_weather_gap_minutes=config.max_weather_gap_minutes
        )
        ref = ingest_module.align_weather(
            weather, start=ref_start, end=ref_end - just_before, max_weather_gap_minutes=config.max_weather_gap_minutes
        )
        match = evaluate_module.match_window(exp, ref, missing_pair_tolerance=config.missing_pair_tolerance)

        valves = evaluate_module.parse_valves(ingest_module.read_csv_text(valves_path))
        threshold = config.saturation_threshold_pct
        exp_stats = evaluate_module.valve_stats(valves, (exp_start, exp_end), saturation_threshold_pct=threshold)
        ref_stats = evaluate_module.valve_stats(
            valves, (match.ref_start, match.ref_start + match.length), saturation_threshold_pct=threshold
        )
        comparison = evaluate_module.compare_valve_stats(exp_stats, ref_stats)

        writer.json("window_match.json", evaluate_module.match_to_dict(match))
        writer.json("valve_stats.json", comparison)
        writer.csv("valve_means_experiment.csv", evaluate_module.valve_table(exp_stats))
        writer.csv("valve_means_reference.csv", evaluate_module.valve_table(ref_stats))
        return {
            "evaluation": {
                "rmse_K": match.rmse_K,
                "ref_start": match.ref_start.isoformat(),
                "median_delta_pct": comparison["median_delta_pct"],
                "saturated_experiment": list(exp_stats.saturated),
                "saturated_reference": list(ref_stats.saturated),
            }
        }


# -- commands ---------------------------------------------------------------


def cmd_ingest(config: RunConfig) -> Path:
    return _run("ingest", config, ("ingest",))


def cmd_cluster(config: RunConfig) -> Path:
    return _run("cluster", config, ("cluster",))


def cmd_demand(config: RunConfig) -> Path:
    return _run("demand", config, ("cluster", "demand"))


def cmd_loads(config: RunConfig) -> Path:
    return _run("loads", config, ("cluster", "demand", "loads"))


def cmd_heatcurve(config: RunConfig) -> Path:
    return _run("heatcurve", config, ("cluster", "demand", "loads", "heatcurve"))


def cmd_evaluate(config: RunConfig) -> Path:
    return _run("evaluate", config, ("evaluate",))


def _run(command: str, config: RunConfig, stages: tuple[str, ...]) -> Path:
    pipeline = Pipeline(config)
    sections: dict[str, Any] = {}
    with staged_directory(config.output_dir, replaces=_previous_artifacts(config.output_dir)) as staging:
        writer = ArtifactWriter(staging)
        for stage in stages:
            sections.update(getattr(pipeline, f"write_{stage}")(writer))
        writer.json(SUMMARY_NAME, build_summary(command, config, writer.written + [SUMMARY_NAME], sections))
    return config.output_dir


def _previous_artifacts(output_dir: Path) -> list[str]:
    """Artifact names recorded by an earlier run into *output_dir*, if any."""

    try:
        recorded = read_json(output_dir / SUMMARY_NAME).get("artifacts", [])
    except (OSError, ValueError, AttributeError):
        return []
    if not isinstance(recorded, list):
        return []
    return [name for name in recorded if isinstance(name, str)]


__all__ = [
    "IngestResult",
    "Pipeline",
    "cmd_cluster",
    "cmd_demand",
    "cmd_evaluate",
    "cmd_heatcurve",
    "cmd_ingest",
    "cmd_loads",
]
