"""Core dataclasses shared across the heatcurve pipeline modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Iterator, Mapping

import numpy as np
import pandas as pd

GRID_STEP_S = 600
GRID_FREQ = "10min"
INTERVALS_PER_DAY = 144


class SeriesKind(str, Enum):
    HEAT_POWER = "heat_power_kW"
    OUTDOOR_TEMP = "outdoor_temp_C"


class BoundaryKind(str, Enum):
    """Envelope element kinds; the order is the order of the U-ratio tuple."""

    WALL = "wall"
    WINDOW = "window"
    ROOF = "roof"
    FLOOR_SLAB = "floor_slab"


class RoomType(str, Enum):
    STANDARD = "standard"
    BATHROOM = "bathroom"
    HALLWAY = "hallway"
    STAIRCASE = "staircase"


DEFAULT_T_IN_C: dict[RoomType, float] = {
    RoomType.STANDARD: 20.0,
    RoomType.BATHROOM: 18.0,
    RoomType.HALLWAY: 20.0,
    RoomType.STAIRCASE: 20.0,
}

CIRCULATION_TYPES = frozenset({RoomType.HALLWAY, RoomType.STAIRCASE})


class Provenance(str, Enum):
    COMPUTED = "computed"
    FRONT_FILLED = "front_filled"
    BACK_FILLED = "back_filled"
    SMOOTHED = "smoothed"


def interval_of_day(timestamp: datetime | pd.Timestamp, utc_offset_minutes: int = 0) -> int:
    """Return the 10-minute interval of the local civil day (0..143) for *timestamp*."""

    ts = pd.Timestamp(timestamp)
    if ts.tzinfo is None:
        ts = ts.tz_localize("UTC")
    local = ts.tz_convert("UTC") + pd.Timedelta(minutes=utc_offset_minutes)
    return (local.hour * 60 + local.minute) // 10


# -- ingest ----------------------------------------------------------------


@dataclass(slots=True, frozen=True)
class RawSeries:
    """Meter or weather samples indexed by strictly increasing UTC timestamps."""

    kind: SeriesKind
    values: pd.Series

    @property
    def points(self) -> list[tuple[datetime, float]]:
        return [(ts.to_pydatetime(), float(value)) for ts, value in self.values.items()]

    @property
    def first(self) -> pd.Timestamp:
        return self.values.index[0]

    @property
    def last(self) -> pd.Timestamp:
        return self.values.index[-1]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(slots=True, frozen=True)
class AlignedSeries:
    """Demand and outdoor temperature on a shared 10-minute grid.

    Missing samples are ``NaN``. Interval ``i`` covers
    ``[start + 600*i, start + 600*(i+1))``.
    """

    start: pd.Timestamp
    demand: np.ndarray
    t_out: np.ndarray
    utc_offset_minutes: int = 0

    def __post_init__(self) -> None:
        if len(self.demand) != len(self.t_out):
            raise ValueError("demand and t_out must have equal length")
        if self.start.tzinfo is None:
            raise ValueError("start must be timezone-aware (UTC)")
        if self.start != self.start.floor(GRID_FREQ):
            raise ValueError(f"start {self.start} is not on the 10-minute grid")

    def __len__(self) -> int:
        return len(self.demand)

    @property
    def step_s(self) -> int:
        return GRID_STEP_S

    @property
    def index(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start, periods=len(self), freq=GRID_FREQ)

    @property
    def end(self) -> pd.Timestamp:
        """Exclusive end of the last interval."""

        return self.start + pd.Timedelta(seconds=GRID_STEP_S * len(self))

    def intervals_of_day(self) -> np.ndarray:
        first = interval_of_day(self.start, self.utc_offset_minutes)
        return (first + np.arange(len(self))) % INTERVALS_PER_DAY


# -- cluster ---------------------------------------------------------------


FEATURE_NAMES: tuple[str, str, str] = ("mean_kW", "q90_kW", "q10_kW")


@dataclass(slots=True, frozen=True)
class IntervalFeatures:
    interval_index: int
    mean_kW: float
    q90_kW: float
    q10_kW: float
    sample_count: int
    max_kW: float

    def vector(self) -> tuple[float, float, float]:
        return (self.mean_kW, self.q90_kW, self.q10_kW)


@dataclass(slots=True, frozen=True)
class ClusterModel:
    n_cluster: int
    assignment: tuple[int, ...]
    centroids: np.ndarray
    feature_scaling: tuple[tuple[float, float], ...]
    seed: int
    wcss_history: tuple[float, ...] = ()
    dropped_features: tuple[str, ...] = ()
    utc_offset_minutes: int = 0

    def __post_init__(self) -> None:
        if len(self.assignment) != INTERVALS_PER_DAY:
            raise ValueError(f"assignment must have {INTERVALS_PER_DAY} entries")
        missing = set(range(self.n_cluster)) - set(self.assignment)
        if missing:
            raise ValueError(f"clusters without intervals: {sorted(missing)}")

    def members(self, cluster: int) -> list[int]:
        return [index for index, label in enumerate(self.assignment) if label == cluster]


# -- demand ----------------------------------------------------------------


@dataclass(slots=True, frozen=True)
class DemandCell:
    q90_demand_kW: float
    sample_count: int


@dataclass(slots=True, frozen=True)
class DemandModel:
    """90%-quantile demand per cluster and outdoor-temperature bin.

    Cells are keyed by the integer bin index ``k``; the bin centre is
    ``k * bin_width_K``.
    """

    bin_width_K: float
    min_samples: int
    n_cluster: int
    cells: Mapping[int, Mapping[int, DemandCell]]
    t_out_range: tuple[float, float]

    def bin_center(self, bin_index: int) -> float:
        return round(bin_index * self.bin_width_K, 9)

    def bins(self, cluster: int) -> list[int]:
        return sorted(self.cells.get(cluster, {}))

    def iter_cells(self) -> Iterator[tuple[int, float, DemandCell]]:
        for cluster in sorted(self.cells):
            for bin_index in self.bins(cluster):
                yield cluster, self.bin_center(bin_index), self.cells[cluster][bin_index]


# -- building --------------------------------------------------------------


@dataclass(slots=True, frozen=True)
class Boundary:
    kind: BoundaryKind
    area_m2: float


@dataclass(slots=True, frozen=True)
class Heater:
    id: str
    q_nom_W: float
    t_sup_nom_C: float
    t_ret_nom_C: float
    exponent_n: float = 1.3

    @property
    def delta_t_nom_K(self) -> float:
        return self.t_sup_nom_C - self.t_ret_nom_C


@dataclass(slots=True, frozen=True)
class Room:
    id: str
    room_type: RoomType
    t_in_C: float
    boundaries: tuple[Boundary, ...]
    heaters: tuple[Heater, ...]
    hallway_shared_wall_m2: Mapping[str, float] = field(default_factory=dict)
    floor: int | None = None

    @property
    def is_circulation(self) -> bool:
        return self.room_type in CIRCULATION_TYPES

    def area(self, kind: BoundaryKind) -> float:
        return sum(boundary.area_m2 for boundary in self.boundaries if boundary.kind is kind)


@dataclass(slots=True, frozen=True)
class BuildingModel:
    building_id: str
    construction_type: str
    rooms: tuple[Room, ...]

    @property
    def n_rooms(self) -> int:
        return len(self.rooms)

    @property
    def n_floors(self) -> int:
        return len({room.floor for room in self.rooms if room.floor is not None})

    @property
    def max_t_in_C(self) -> float:
        return max(room.t_in_C for room in self.rooms)

    def room(self, room_id: str) -> Room:
        for room in self.rooms:
            if room.id == room_id:
                return room
        raise KeyError(room_id)

    def heaters(self) -> Iterator[tuple[Room, Heater]]:
        for room in self.rooms:
            for heater in room.heaters:
                yield room, heater

    def circulation_rooms(self) -> list[Room]:
        return [room for room in self.rooms if room.is_circulation]


@dataclass(slots=True, frozen=True)
class URatioTable:
    u_wall: float
    u_window: float
    u_roof: float
    u_floor_slab: float

    def value(self, kind: BoundaryKind) -> float:
        return getattr(self, f"u_{kind.value}")

    def scaled(self, factor: float) -> "URatioTable":
        return URatioTable(
            u_wall=self.u_wall * factor,
            u_window=self.u_window * factor,
            u_roof=self.u_roof * factor,
            u_floor_slab=self.u_floor_slab * factor,
        )


# -- loads / lmtd ----------------------------------------------------------


@dataclass(slots=True)
class RoomLoads:
    cluster: int
    t_out_C: float
    q_mod_W: dict[str, float]
    solved_u: dict[BoundaryKind, float]
    hallway_residual_W: dict[str, float] = field(default_factory=dict)
    hallway_capacity_W: dict[str, float] = field(default_factory=dict)

    @property
    def total_W(self) -> float:
        return float(sum(self.q_mod_W.values()))


@dataclass(slots=True, frozen=True)
class HeaterState:
    heater_id: str
    room_id: str
    lmtd_nom_K: float
    delta_t_K: float
    q_nom_W: float
    q_required_W: float
    lmtd_required_K: float
    t_sup_required_C: float


# -- heatcurve -------------------------------------------------------------


@dataclass(slots=True)
class Heatcurve:
    """Supply-temperature setpoints per outdoor-temperature bin for one cluster.

    ``computed`` holds the aggregated values before postprocessing and is never
    modified; ``points`` holds the setpoints that get exported.
    """

    cluster: int
    bin_width_K: float
    computed: dict[float, float]
    limiting_heater: dict[float, str]
    floor_C: float
    points: dict[float, float] = field(default_factory=dict)
    provenance: dict[float, Provenance] = field(default_factory=dict)
    safety_offset_K: float = 0.0

    def __post_init__(self) -> None:
        if not self.points:
            self.points = dict(sorted(self.computed.items()))
            self.provenance = {t_out: Provenance.COMPUTED for t_out in self.points}


# -- evaluate --------------------------------------------------------------


@dataclass(slots=True, frozen=True)
class WindowMatch:
    ref_start: pd.Timestamp
    rmse_K: float
    length: timedelta
    offset: int
    n_pairs: int


@dataclass(slots=True, frozen=True)
class FiveNumberSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


@dataclass(slots=True, frozen=True)
class ValveStats:
    means: Mapping[str, float]
    summary: FiveNumberSummary
    outliers: tuple[str, ...]
    saturated: tuple[str, ...]
    excluded: tuple[str, ...] = ()
    window: tuple[pd.Timestamp, pd.Timestamp] | None = None
