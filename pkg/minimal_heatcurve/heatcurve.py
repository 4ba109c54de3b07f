"""Building heatcurves: aggregation over heaters, gap filling, smoothing and offset."""
from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.signal import savgol_filter

from .errors import ConfigError, CurveError, InfeasibleAllocationError, ParseError
from .lmtd import HeaterSplit, heater_requirements
from .loads import LoadsSolver, partition_hallway_residual, solve
from .logger import get_logger, log_event
from .models import BuildingModel, DemandModel, Heatcurve, HeaterState, Provenance, RoomLoads

LOGGER = get_logger("heatcurve")

FLOOR_MARGIN_K = 1.0
_CHANGE_TOLERANCE = 1e-12


@dataclass(slots=True)
class CurveBuild:
    """A cluster's aggregated curve together with the per-bin intermediates."""

    curve: Heatcurve
    loads: dict[float, RoomLoads] = field(default_factory=dict)
    states: dict[float, list[HeaterState]] = field(default_factory=dict)
    skipped: list[float] = field(default_factory=list)


def aggregate(states: Sequence[HeaterState], cluster: int, t_out: float) -> tuple[float, str]:
    """Highest required supply temperature and the heater that requires it.

    Ties go to the lexicographically smallest heater id.
    """

    if not states:
        raise CurveError(f"no heater requirements for cluster {cluster} at t_out={t_out}")
    limiting = min(states, key=lambda state: (-state.t_sup_required_C, state.heater_id))
    return limiting.t_sup_required_C, limiting.heater_id


def build_heatcurve(
    demand: DemandModel,
    cluster: int,
    building: BuildingModel,
    ratios: tuple[float, float, float],
    *,
    hallway_t_sup_C: float = 45.0,
    heater_split: HeaterSplit = "equal",
    solver: LoadsSolver = "closed",
) -> CurveBuild:
    """Run loads, hallway partitioning and heater inversion for every demand bin of *cluster*.

    Bins where no room is colder inside than outside are left as gaps.
    """

    computed: dict[float, float] = {}
    limiting: dict[float, str] = {}
    per_bin_loads: dict[float, RoomLoads] = {}
    per_bin_states: dict[float, list[HeaterState]] = {}
    skipped: list[float] = []

    for bin_index in demand.bins(cluster):
        t_out = demand.bin_center(bin_index)
        q_mod_W = demand.cells[cluster][bin_index].q90_demand_kW * 1000.0
        try:
            loads = solve(building, ratios, q_mod_W, t_out, cluster=cluster, solver=solver)
        except InfeasibleAllocationError:
            if t_out < building.max_t_in_C:
                raise
            skipped.append(t_out)
            log_event(
                LOGGER,
                level=logging.WARNING,
                action="heatcurve.bin_skipped",
                message=f"Demand {q_mod_W:.0f} W at or above every room temperature; bin left as gap",
                cluster=cluster,
                t_out=t_out,
            )
            continue

        if building.circulation_rooms():
            loads = partition_hallway_residual(loads, building, hallway_t_sup_C)
        states = heater_requirements(loads, building, split=heater_split)
        per_bin_loads[t_out] = loads
        per_bin_states[t_out] = states
        if not states:
            continue
        t_sup, heater_id = aggregate(states, cluster, t_out)
        computed[t_out] = max(t_sup, building.max_t_in_C)
        limiting[t_out] = heater_id

    curve = Heatcurve(
        cluster=cluster,
        bin_width_K=demand.bin_width_K,
        computed=dict(sorted(computed.items())),
        limiting_heater=limiting,
        floor_C=building.max_t_in_C + FLOOR_MARGIN_K,
    )
    return CurveBuild(curve=curve, loads=per_bin_loads, states=per_bin_states, skipped=skipped)


def verify_hallway_assumption(curve: Heatcurve, assumed_t_sup_C: float) -> dict[str, Any]:
    """Check the assumed hallway supply temperature never exceeds the computed curve."""

    violations = sorted(t_out for t_out, t_sup in curve.computed.items() if t_sup < assumed_t_sup_C)
    minimum = min(curve.computed.values()) if curve.computed else None
    report = {
        "cluster": curve.cluster,
        "assumed_t_sup_C": assumed_t_sup_C,
        "min_t_sup_C": minimum,
        "passed": not violations,
        "violating_bins": violations,
    }
    if violations:
        log_event(
            LOGGER,
            level=logging.WARNING,
            action="heatcurve.hallway_violation",
            message=f"Assumed hallway supply {assumed_t_sup_C} C exceeds the curve in {len(violations)} bin(s)",
            cluster=curve.cluster,
            extra={"bins": violations},
        )
    return report


def postprocess(
    curve: Heatcurve,
    output_range: tuple[float, float],
    window: int = 7,
    polyorder: int = 2,
    *,
    safety_offset_K: float | None = None,
) -> Heatcurve:
    """Fill gaps over *output_range*, smooth, apply the safety offset and clamp.

    Always starts again from ``curve.computed``, so it can be re-applied.
    Bins colder than the coldest computed bin are back filled from it; warmer
    bins and interior gaps take the next computed value on the cold side.
    Smoothing is a Savitzky-Golay filter fitted on the truncated window at the
    edges; it is skipped when there are fewer computed points than *window*.
    """

    if window < 1 or window % 2 == 0:
        raise ConfigError(f"smoothing window must be a positive odd integer, got {window}")
    if polyorder < 0 or window <= polyorder:
        raise ConfigError(f"smoothing window {window} must exceed polyorder {polyorder}")
    if not curve.computed:
        raise CurveError(f"cluster {curve.cluster} has no computed heatcurve points")

    offset = curve.safety_offset_K if safety_offset_K is None else safety_offset_K
    width = curve.bin_width_K
    computed = {int(round(t_out / width)): value for t_out, value in curve.computed.items()}
    low, high = output_range
    first = min(math.ceil(low / width - 1e-9), min(computed))
    last = max(math.floor(high / width + 1e-9), max(computed))
    grid = list(range(first, last + 1))

    coldest = min(computed)
    values: list[float] = []
    provenance: list[Provenance] = []
    carried = computed[coldest]
    for k in grid:
        if k in computed:
            carried = computed[k]
            values.append(carried)
            provenance.append(Provenance.COMPUTED)
        elif k < coldest:
            values.append(computed[coldest])
            provenance.append(Provenance.BACK_FILLED)
        else:
            # interior gaps and the warm edge carry the last computed value from the cold side
            values.append(carried)
            provenance.append(Provenance.FRONT_FILLED)

    filled = np.asarray(values, dtype=float)
    smoothed = filled
    if len(computed) < window or len(grid) < window:
        log_event(
            LOGGER,
            level=logging.WARNING,
            action="heatcurve.smoothing_skipped",
            message=f"{len(computed)} computed point(s) over {len(grid)} bin(s); window {window} not applied",
            cluster=curve.cluster,
        )
    else:
        smoothed = savgol_filter(filled, window, polyorder, mode="interp")
        for i in range(len(grid)):
            if provenance[i] is Provenance.COMPUTED and abs(smoothed[i] - filled[i]) > _CHANGE_TOLERANCE:
                provenance[i] = Provenance.SMOOTHED

    final = np.maximum(smoothed + offset, curve.floor_C)
    keys = [round(k * width, 9) for k in grid]
    return Heatcurve(
        cluster=curve.cluster,
        bin_width_K=width,
        computed=dict(curve.computed),
        limiting_heater=dict(curve.limiting_heater),
        floor_C=curve.floor_C,
        points={key: float(value) for key, value in zip(keys, final)},
        provenance=dict(zip(keys, provenance)),
        safety_offset_K=offset,
    )


def critical_heater_report(builds: Iterable[CurveBuild], building: BuildingModel) -> dict[str, Any]:
    """Per room: highest required supply temperature over all clusters and bins.

    Includes the room's floor and how often each of its heaters limits the curve.
    """

    worst: dict[str, tuple[float, int, float, str]] = {}
    limiting_counts: dict[str, int] = {}
    for build in builds:
        cluster = build.curve.cluster
        for heater_id in build.curve.limiting_heater.values():
            limiting_counts[heater_id] = limiting_counts.get(heater_id, 0) + 1
        for t_out, states in build.states.items():
            for state in states:
                current = worst.get(state.room_id)
                if current is None or state.t_sup_required_C > current[0]:
                    worst[state.room_id] = (state.t_sup_required_C, cluster, t_out, state.heater_id)

    rooms = []
    for room in building.rooms:
        if room.id not in worst:
            continue
        t_sup, cluster, t_out, heater_id = worst[room.id]
        rooms.append(
            {
                "room_id": room.id,
                "room_type": room.room_type.value,
                "floor": room.floor,
                "max_t_sup_required_C": t_sup,
                "cluster": cluster,
                "t_out_C": t_out,
                "heater_id": heater_id,
                "limiting_bins": {heater.id: limiting_counts.get(heater.id, 0) for heater in room.heaters},
            }
        )
    rooms.sort(key=lambda item: (-item["max_t_sup_required_C"], item["room_id"]))
    return {
        "building_id": building.building_id,
        "critical_room": rooms[0]["room_id"] if rooms else None,
        "rooms": rooms,
    }


def parse_reference_curve(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Read a previously active heatcurve from ``t_out_C,t_sup_C`` CSV text."""

    try:
        frame = pd.read_csv(io.StringIO(text))
    except pd.errors.EmptyDataError as exc:
        raise ParseError(f"malformed reference heatcurve: {exc}") from exc
    except pd.errors.ParserError as exc:
        raise ParseError.from_tokenizer(exc, "reference heatcurve") from exc
    if list(frame.columns) != ["t_out_C", "t_sup_C"]:
        raise ParseError("expected header 't_out_C,t_sup_C'", line=1)
    frame = frame.apply(pd.to_numeric, errors="coerce")
    bad = frame.isna().any(axis=1)
    if bad.any():
        raise ParseError("non-numeric reference heatcurve row", line=int(bad.idxmax()) + 2)
    if frame.empty:
        raise ParseError("reference heatcurve has no rows")
    frame = frame.sort_values("t_out_C", kind="stable")
    return frame["t_out_C"].to_numpy(dtype=float), frame["t_sup_C"].to_numpy(dtype=float)


def compare_curves(
    curve: Heatcurve,
    reference: tuple[np.ndarray, np.ndarray],
    t_out_range: tuple[float, float] | None = None,
    sample_points: Sequence[float] = (-10.0, 0.0, 5.0),
) -> dict[str, Any]:
    """Per-bin difference ``curve - reference``; positive means the new curve is warmer.

    The reference is interpolated linearly and not extrapolated.
    """

    ref_t_out, ref_t_sup = reference
    low, high = t_out_range if t_out_range is not None else (-math.inf, math.inf)
    lower, upper = max(low, ref_t_out[0]), min(high, ref_t_out[-1])

    bins = [t_out for t_out in curve.points if lower <= t_out <= upper]
    reference_values = np.interp(bins, ref_t_out, ref_t_sup)
    differences = {t_out: curve.points[t_out] - float(ref) for t_out, ref in zip(bins, reference_values)}

    at_points: dict[str, float | None] = {}
    for t_sample in sample_points:
        if not curve.points:
            at_points[f"{t_sample:g}"] = None
            continue
        nearest = min(curve.points, key=lambda t_out: abs(t_out - t_sample))
        inside = ref_t_out[0] <= nearest <= ref_t_out[-1] and abs(nearest - t_sample) <= curve.bin_width_K / 2
        at_points[f"{t_sample:g}"] = (
            curve.points[nearest] - float(np.interp(nearest, ref_t_out, ref_t_sup)) if inside else None
        )

    return {
        "cluster": curve.cluster,
        "mean_difference_K": float(np.mean(list(differences.values()))) if differences else None,
        "max_difference_K": max(differences.values()) if differences else None,
        "min_difference_K": min(differences.values()) if differences else None,
        "difference_at_K": at_points,
        "bins": [{"t_out_C": t_out, "difference_K": value} for t_out, value in differences.items()],
    }


def compare_clusters(curves: Mapping[int, Heatcurve], t_out_range: tuple[float, float]) -> list[dict[str, Any]]:
    """Mean pairwise difference between cluster curves over the bins they share in *t_out_range*."""

    low, high = t_out_range
    pairs: list[dict[str, Any]] = []
    ordered = sorted(curves)
    for i, first in enumerate(ordered):
        for second in ordered[i + 1 :]:
            a, b = curves[first].points, curves[second].points
            shared = [t_out for t_out in a if t_out in b and low <= t_out <= high]
            mean = float(np.mean([a[t_out] - b[t_out] for t_out in shared])) if shared else None
            pairs.append({"cluster_a": first, "cluster_b": second, "bins": len(shared), "mean_difference_K": mean})
    return pairs


def heatcurve_table(curve: Heatcurve) -> pd.DataFrame:
    rows = [
        {
            "cluster": curve.cluster,
            "t_out_C": t_out,
            "t_sup_C": t_sup,
            "provenance": curve.provenance[t_out].value,
            "limiting_heater": curve.limiting_heater.get(t_out, ""),
        }
        for t_out, t_sup in curve.points.items()
    ]
    return pd.DataFrame(rows, columns=["cluster", "t_out_C", "t_sup_C", "provenance", "limiting_heater"])


def automation_table(curve: Heatcurve) -> pd.DataFrame:
    return pd.DataFrame({"t_out_C": list(curve.points), "t_sup_C": list(curve.points.values())})


def requirement_table(builds: Iterable[CurveBuild]) -> pd.DataFrame:
    rows = [
        {
            "cluster": build.curve.cluster,
            "t_out_C": t_out,
            "room_id": state.room_id,
            "heater_id": state.heater_id,
            "q_required_W": state.q_required_W,
            "t_sup_required_C": state.t_sup_required_C,
        }
        for build in builds
        for t_out, states in build.states.items()
        for state in states
    ]
    return pd.DataFrame(
        rows, columns=["cluster", "t_out_C", "room_id", "heater_id", "q_required_W", "t_sup_required_C"]
    )


def room_load_table(builds: Iterable[CurveBuild]) -> pd.DataFrame:
    rows = [
        {"cluster": build.curve.cluster, "t_out_C": t_out, "room_id": room_id, "q_mod_W": q_mod}
        for build in builds
        for t_out, loads in build.loads.items()
        for room_id, q_mod in loads.q_mod_W.items()
    ]
    return pd.DataFrame(rows, columns=["cluster", "t_out_C", "room_id", "q_mod_W"])


__all__ = [
    "CurveBuild",
    "aggregate",
    "automation_table",
    "build_heatcurve",
    "compare_clusters",
    "compare_curves",
    "critical_heater_report",
    "heatcurve_table",
    "parse_reference_curve",
    "postprocess",
    "requirement_table",
    "room_load_table",
    "verify_hallway_assumption",
]
