"""Radiator model: logarithmic mean temperature difference and its inversion."""
from __future__ import annotations

import math
from typing import Literal

from .errors import BuildingConfigurationError, LmtdDomainError
from .models import BuildingModel, Heater, HeaterState, Room, RoomLoads

HeaterSplit = Literal["equal", "capacity"]

_SINGULAR_DELTA_K = 1e-9
_SERIES_LIMIT = 1e6


def lmtd(t_sup_C: float, t_ret_C: float, t_in_C: float) -> float:
    """Logarithmic mean temperature difference between radiator water and room air."""

    excess_ret = t_ret_C - t_in_C
    if excess_ret <= 0 or t_sup_C - t_in_C <= 0:
        raise LmtdDomainError(
            f"return {t_ret_C} and supply {t_sup_C} must both exceed the room temperature {t_in_C}"
        )
    delta = t_sup_C - t_ret_C
    if abs(delta) < _SINGULAR_DELTA_K:
        return (t_sup_C + t_ret_C) / 2.0 - t_in_C
    return delta / math.log1p(delta / excess_ret)


def required_lmtd(q_mod_W: float, q_nom_W: float, exponent_n: float, lmtd_nom_K: float) -> float:
    """LMTD a heater needs to deliver *q_mod_W*, assuming the nominal spread is kept.

    Loads above nominal are allowed and follow the same power law.
    """

    if q_nom_W <= 0:
        raise LmtdDomainError(f"nominal power must be positive, got {q_nom_W}")
    if q_mod_W < 0:
        raise LmtdDomainError(f"required power must be non-negative, got {q_mod_W}")
    if q_mod_W == 0:
        return 0.0
    if q_mod_W == q_nom_W:
        return lmtd_nom_K
    return (q_mod_W / q_nom_W) ** (1.0 / exponent_n) * lmtd_nom_K


def invert_supply_temp(lmtd_required_K: float, delta_t_K: float, t_in_C: float) -> float:
    """Supply temperature whose LMTD at spread *delta_t_K* equals *lmtd_required_K*."""

    if lmtd_required_K < 0:
        raise LmtdDomainError(f"required LMTD must be non-negative, got {lmtd_required_K}")
    if delta_t_K <= 0:
        raise LmtdDomainError(f"temperature spread must be positive, got {delta_t_K}")
    if lmtd_required_K == 0:
        return t_in_C
    if lmtd_required_K >= _SERIES_LIMIT * delta_t_K:
        return t_in_C + lmtd_required_K + delta_t_K / 2.0
    # t_in + dT * x / (x - 1) with x = exp(dT / L), written to avoid cancellation
    return t_in_C + delta_t_K / -math.expm1(-delta_t_K / lmtd_required_K)


def heater_state(heater: Heater, room: Room, q_required_W: float) -> HeaterState:
    lmtd_nom = lmtd(heater.t_sup_nom_C, heater.t_ret_nom_C, room.t_in_C)
    lmtd_req = required_lmtd(q_required_W, heater.q_nom_W, heater.exponent_n, lmtd_nom)
    return HeaterState(
        heater_id=heater.id,
        room_id=room.id,
        lmtd_nom_K=lmtd_nom,
        delta_t_K=heater.delta_t_nom_K,
        q_nom_W=heater.q_nom_W,
        q_required_W=q_required_W,
        lmtd_required_K=lmtd_req,
        t_sup_required_C=invert_supply_temp(lmtd_req, heater.delta_t_nom_K, room.t_in_C),
    )


def heater_requirements(
    loads: RoomLoads,
    building: BuildingModel,
    *,
    split: HeaterSplit = "equal",
) -> list[HeaterState]:
    """Required supply temperature of every heater outside circulation rooms.

    A room's load is split equally between its heaters, or in proportion to
    nominal power with ``split="capacity"``.
    """

    states: list[HeaterState] = []
    for room in building.rooms:
        if room.is_circulation:
            continue
        q_room = loads.q_mod_W.get(room.id, 0.0)
        if not room.heaters:
            if q_room > 0:
                raise BuildingConfigurationError(
                    f"room {room.id!r} needs {q_room:.1f} W but has no heaters"
                )
            continue
        total_nom = sum(heater.q_nom_W for heater in room.heaters)
        for heater in room.heaters:
            if split == "capacity":
                share = q_room * heater.q_nom_W / total_nom
            else:
                share = q_room / len(room.heaters)
            states.append(heater_state(heater, room, share))
    return states


__all__ = [
    "HeaterSplit",
    "heater_requirements",
    "heater_state",
    "invert_supply_temp",
    "lmtd",
    "required_lmtd",
]
