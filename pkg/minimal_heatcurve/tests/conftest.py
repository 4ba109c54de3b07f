from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from minimal_heatcurve.logger import LOGGER_NAME

START = pd.Timestamp("2021-01-04T00:00:00Z")
U_VALUES = {"u_wall": 1.0, "u_window": 2.8, "u_roof": 0.6, "u_floor_slab": 0.8}

# room id -> (t_in, {kind: area}, [(heater id, q_nom, t_sup_nom, t_ret_nom)])
ROOMS = {
    "r1": (20.0, {"wall": 20.0, "window": 4.0}, [("r1-h", 1200.0, 70.0, 55.0)]),
    "r2": (20.0, {"wall": 15.0, "window": 3.0, "roof": 10.0}, [("r2-h", 1000.0, 70.0, 55.0)]),
    "bath": (18.0, {"wall": 8.0, "window": 1.0}, [("bath-h", 600.0, 70.0, 55.0)]),
    "r4": (
        20.0,
        {"wall": 12.0, "window": 2.0, "floor_slab": 15.0},
        [("r4-a", 700.0, 75.0, 65.0), ("r4-b", 500.0, 75.0, 65.0)],
    ),
}


@dataclass(slots=True)
class Dataset:
    directory: Path
    config: Path
    demand: Path
    weather: Path
    building: Path
    u_values: Path
    valves: Path


def room_conductance(room_id: str) -> float:
    _, areas, _ = ROOMS[room_id]
    return sum(area * U_VALUES[f"u_{kind}"] for kind, area in areas.items())


def room_load_W(room_id: str, t_out: float) -> float:
    t_in = ROOMS[room_id][0]
    return room_conductance(room_id) * max(0.0, t_in - t_out)


def outdoor_temperature(n: int) -> np.ndarray:
    # integer temperatures from -10 to 15, each held for an hour
    return -10.0 + (np.arange(n) // 6) % 26


def _series_csv(index: pd.DatetimeIndex, values: np.ndarray) -> str:
    lines = ["timestamp,value"]
    lines.extend(f"{ts.strftime('%Y-%m-%dT%H:%M:%SZ')},{value!r}" for ts, value in zip(index, values.tolist()))
    return "\n".join(lines) + "\n"


def write_dataset(directory: Path, *, days: int = 10, weather_offset: pd.Timedelta | None = None, **config) -> Dataset:
    directory.mkdir(parents=True, exist_ok=True)
    n = days * 144
    index = pd.date_range(START, periods=n, freq="10min")
    t_out = outdoor_temperature(n)
    demand_kW = np.array([sum(room_load_W(room_id, t) for room_id in ROOMS) for t in t_out]) / 1000.0

    demand_path = directory / "demand.csv"
    demand_path.write_text(_series_csv(index, demand_kW), encoding="utf-8")
    weather_path = directory / "weather.csv"
    weather_index = index + weather_offset if weather_offset is not None else index
    weather_path.write_text(_series_csv(weather_index, t_out), encoding="utf-8")

    building = {
        "building_id": "test-building",
        "construction_type": "MFH_T",
        "rooms": [
            {
                "id": room_id,
                "room_type": "bathroom" if room_id == "bath" else "standard",
                "t_in_C": t_in,
                "floor": 0 if room_id in {"r1", "bath"} else 1,
                "boundaries": [{"kind": kind, "area_m2": area} for kind, area in areas.items()],
                "heaters": [
                    {"id": heater_id, "q_nom_W": q_nom, "t_sup_nom_C": t_sup, "t_ret_nom_C": t_ret}
                    for heater_id, q_nom, t_sup, t_ret in heaters
                ],
            }
            for room_id, (t_in, areas, heaters) in ROOMS.items()
        ],
    }
    building_path = directory / "building.json"
    building_path.write_text(json.dumps(building, indent=2), encoding="utf-8")
    u_values_path = directory / "u_values.json"
    u_values_path.write_text(json.dumps({"MFH_T": U_VALUES}, indent=2), encoding="utf-8")

    valve_lines = ["timestamp,heater_id,opening_pct"]
    openings = {"r1-h": 35.0, "r2-h": 45.0, "bath-h": 20.0, "r4-a": 55.0, "r4-b": 100.0}
    for ts in index[::6]:
        for heater_id, value in openings.items():
            valve_lines.append(f"{ts.strftime('%Y-%m-%dT%H:%M:%SZ')},{heater_id},{value}")
    valves_path = directory / "valves.csv"
    valves_path.write_text("\n".join(valve_lines) + "\n", encoding="utf-8")

    payload = {
        "paths": {
            "demand": "demand.csv",
            "weather": "weather.csv",
            "building": "building.json",
            "u_values": "u_values.json",
            "valves": "valves.csv",
        },
        "output_dir": "out",
        "output_range": [-10, 15],
        **config,
    }
    config_path = directory / "run.json"
    config_path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return Dataset(
        directory=directory,
        config=config_path,
        demand=demand_path,
        weather=weather_path,
        building=building_path,
        u_values=u_values_path,
        valves=valves_path,
    )


@pytest.fixture
def dataset(tmp_path) -> Dataset:
    return write_dataset(tmp_path / "data")


@pytest.fixture(autouse=True)
def isolated_logging(tmp_path, monkeypatch):
    monkeypatch.setenv("HOME", str(tmp_path))
    logging.getLogger(LOGGER_NAME).handlers.clear()
    yield
    for handler in logging.getLogger(LOGGER_NAME).handlers:
        handler.close()
    logging.getLogger(LOGGER_NAME).handlers.clear()
