"""Building description: rooms, envelope boundaries, heaters and typical U-values."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping

from .errors import BuildingValidationError
from .models import (
    DEFAULT_T_IN_C,
    Boundary,
    BoundaryKind,
    BuildingModel,
    Heater,
    Room,
    RoomType,
    URatioTable,
)
from .schema import load_schema, locate_pointer, parse_document, read_document, validate_document

BUILDING_SCHEMA = "building.schema.json"
U_VALUES_SCHEMA = "u_values.schema.json"
DEFAULT_EXPONENT_N = 1.3
DEFAULT_ANCHOR = BoundaryKind.WINDOW
# U-ratios are kept to this many significant digits
RATIO_DIGITS = 10


def load_building(content: str, *, default_exponent_n: float = DEFAULT_EXPONENT_N) -> BuildingModel:
    """Parse and validate a building JSON document.

    Schema violations and broken invariants raise
    :class:`BuildingValidationError` pointing at the offending field.
    """

    data = parse_document(content)
    validate_document(data, load_schema(BUILDING_SCHEMA), content)
    _check_invariants(data, content)

    rooms = tuple(_room_from_dict(raw, default_exponent_n) for raw in data["rooms"])
    return BuildingModel(
        building_id=data["building_id"],
        construction_type=data["construction_type"],
        rooms=rooms,
    )


def read_building(path: str | Path, *, default_exponent_n: float = DEFAULT_EXPONENT_N) -> BuildingModel:
    return load_building(read_document(path), default_exponent_n=default_exponent_n)


def save_building(model: BuildingModel) -> str:
    payload = {
        "building_id": model.building_id,
        "construction_type": model.construction_type,
        "rooms": [_room_to_dict(room) for room in model.rooms],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def load_u_ratio_table(content: str, construction_type: str) -> URatioTable:
    """Read the typical U-values of *construction_type* from a U-value data file."""

    data = parse_document(content)
    validate_document(data, load_schema(U_VALUES_SCHEMA), content)
    entry = data.get(construction_type)
    if construction_type == "description" or not isinstance(entry, Mapping):
        known = ", ".join(sorted(key for key in data if key != "description"))
        raise BuildingValidationError(
            f"Unknown construction type {construction_type!r}; known types: {known}",
        )
    return URatioTable(
        u_wall=float(entry["u_wall"]),
        u_window=float(entry["u_window"]),
        u_roof=float(entry["u_roof"]),
        u_floor_slab=float(entry["u_floor_slab"]),
    )


def read_u_ratio_table(path: str | Path, construction_type: str) -> URatioTable:
    return load_u_ratio_table(read_document(path), construction_type)


def u_ratios(table: URatioTable, anchor: BoundaryKind = DEFAULT_ANCHOR) -> tuple[float, float, float]:
    """Return the three U-value ratios of the non-anchor kinds to the *anchor* kind.

    With the default window anchor this is
    ``(u_wall/u_window, u_roof/u_window, u_floor_slab/u_window)``. Ratios are
    rounded to :data:`RATIO_DIGITS` significant digits, so a uniformly scaled
    table yields the very same ratios and hence identical room loads.
    """

    base = table.value(anchor)
    first, second, third = (
        _significant(table.value(kind) / base) for kind in BoundaryKind if kind is not anchor
    )
    return first, second, third


def relative_u(
    ratios: tuple[float, float, float],
    anchor: BoundaryKind = DEFAULT_ANCHOR,
) -> dict[BoundaryKind, float]:
    """Resolve *ratios* into one relative U-value per kind, the anchor being 1."""

    values = iter(ratios)
    return {kind: 1.0 if kind is anchor else next(values) for kind in BoundaryKind}


# -- helpers ------------------------------------------------------------


def _significant(value: float) -> float:
    return float(f"{value:.{RATIO_DIGITS}g}")


def _fail(message: str, path: tuple[str | int, ...], content: str) -> BuildingValidationError:
    line, column = locate_pointer(content, path)
    return BuildingValidationError(message, path, line, column)


def _check_invariants(data: Mapping[str, Any], content: str) -> None:
    rooms = data["rooms"]
    room_types = {raw["id"]: raw["room_type"] for raw in rooms}
    seen_rooms: set[str] = set()
    seen_heaters: set[str] = set()

    for i, raw in enumerate(rooms):
        room_id = raw["id"]
        if room_id in seen_rooms:
            raise _fail(f"Duplicate room id {room_id!r}", ("rooms", i, "id"), content)
        seen_rooms.add(room_id)

        t_in = raw.get("t_in_C", DEFAULT_T_IN_C[RoomType(raw["room_type"])])
        if not math.isfinite(t_in):
            raise _fail("Indoor temperature must be finite", ("rooms", i, "t_in_C"), content)

        for j, boundary in enumerate(raw["boundaries"]):
            if not math.isfinite(boundary["area_m2"]):
                raise _fail("Area must be finite", ("rooms", i, "boundaries", j, "area_m2"), content)

        for j, heater in enumerate(raw["heaters"]):
            path = ("rooms", i, "heaters", j)
            if heater["id"] in seen_heaters:
                raise _fail(f"Duplicate heater id {heater['id']!r}", path + ("id",), content)
            seen_heaters.add(heater["id"])
            if not heater["t_sup_nom_C"] > heater["t_ret_nom_C"]:
                raise _fail(
                    f"Nominal supply {heater['t_sup_nom_C']} must exceed nominal return {heater['t_ret_nom_C']}",
                    path + ("t_sup_nom_C",),
                    content,
                )
            if not heater["t_ret_nom_C"] > t_in:
                raise _fail(
                    f"Nominal return {heater['t_ret_nom_C']} must exceed the room temperature {t_in}",
                    path + ("t_ret_nom_C",),
                    content,
                )
            if not math.isfinite(heater["q_nom_W"]):
                raise _fail("Nominal power must be finite", path + ("q_nom_W",), content)

        for hallway_id in raw.get("hallway_shared_wall_m2", {}):
            path = ("rooms", i, "hallway_shared_wall_m2", hallway_id)
            if hallway_id not in room_types:
                raise _fail(f"Unknown hallway reference {hallway_id!r}", path, content)
            if hallway_id == room_id:
                raise _fail("A room cannot share a hallway wall with itself", path, content)
            if RoomType(room_types[hallway_id]) not in (RoomType.HALLWAY, RoomType.STAIRCASE):
                raise _fail(f"Room {hallway_id!r} is not a hallway or staircase", path, content)


def _room_from_dict(raw: Mapping[str, Any], default_exponent_n: float) -> Room:
    room_type = RoomType(raw["room_type"])
    return Room(
        id=raw["id"],
        room_type=room_type,
        t_in_C=float(raw.get("t_in_C", DEFAULT_T_IN_C[room_type])),
        boundaries=tuple(
            Boundary(kind=BoundaryKind(item["kind"]), area_m2=float(item["area_m2"]))
            for item in raw["boundaries"]
        ),
        heaters=tuple(
            Heater(
                id=item["id"],
                q_nom_W=float(item["q_nom_W"]),
                t_sup_nom_C=float(item["t_sup_nom_C"]),
                t_ret_nom_C=float(item["t_ret_nom_C"]),
                exponent_n=float(item.get("exponent_n", default_exponent_n)),
            )
            for item in raw["heaters"]
        ),
        hallway_shared_wall_m2={key: float(value) for key, value in raw.get("hallway_shared_wall_m2", {}).items()},
        floor=raw.get("floor"),
    )


def _room_to_dict(room: Room) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "id": room.id,
        "room_type": room.room_type.value,
        "t_in_C": room.t_in_C,
    }
    if room.floor is not None:
        payload["floor"] = room.floor
    payload["boundaries"] = [
        {"kind": boundary.kind.value, "area_m2": boundary.area_m2} for boundary in room.boundaries
    ]
    payload["heaters"] = [
        {
            "id": heater.id,
            "q_nom_W": heater.q_nom_W,
            "t_sup_nom_C": heater.t_sup_nom_C,
            "t_ret_nom_C": heater.t_ret_nom_C,
            "exponent_n": heater.exponent_n,
        }
        for heater in room.heaters
    ]
    if room.hallway_shared_wall_m2:
        payload["hallway_shared_wall_m2"] = dict(room.hallway_shared_wall_m2)
    return payload


__all__ = [
    "DEFAULT_ANCHOR",
    "load_building",
    "load_u_ratio_table",
    "read_building",
    "read_u_ratio_table",
    "relative_u",
    "save_building",
    "u_ratios",
]
