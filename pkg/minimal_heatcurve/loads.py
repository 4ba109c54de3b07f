"""Room heat-load allocation and hallway residual handling.

The building demand is split over rooms in proportion to their envelope
weight ``sum_k A_ik * r_k * (t_in_i - t_out)``, where ``r_k`` are the typical
U-values relative to the anchor kind. Rooms at or below the outdoor
temperature take no load. The absolute U-values follow from the closure
``sum_i q_i = Q_mod``.
"""
from __future__ import annotations

import logging
from typing import Literal

import numpy as np

from .building import DEFAULT_ANCHOR, relative_u
from .errors import BuildingConfigurationError, InfeasibleAllocationError
from .lmtd import lmtd
from .logger import get_logger, log_event
from .models import BoundaryKind, BuildingModel, Room, RoomLoads

LOGGER = get_logger("loads")

LoadsSolver = Literal["closed", "dense"]

# relative to the building demand
RESIDUAL_TOLERANCE = 1e-12
MAX_RESIDUAL_PASSES = 10_000


def envelope_weights(
    building: BuildingModel,
    relative: dict[BoundaryKind, float],
    t_out_C: float,
) -> dict[str, float]:
    weights: dict[str, float] = {}
    for room in building.rooms:
        if room.t_in_C > t_out_C:
            conductance = sum(boundary.area_m2 * relative[boundary.kind] for boundary in room.boundaries)
            weights[room.id] = conductance * (room.t_in_C - t_out_C)
        else:
            weights[room.id] = 0.0
    return weights


def solve_room_loads(
    building: BuildingModel,
    ratios: tuple[float, float, float],
    q_mod_W: float,
    t_out_C: float,
    *,
    cluster: int = 0,
    anchor: BoundaryKind = DEFAULT_ANCHOR,
) -> RoomLoads:
    """Closed-form allocation of *q_mod_W* over the rooms of *building*."""

    if q_mod_W < 0:
        raise InfeasibleAllocationError(f"building demand must be non-negative, got {q_mod_W}")

    relative = relative_u(ratios, anchor)
    weights = envelope_weights(building, relative, t_out_C)
    total = sum(weights.values())

    if q_mod_W == 0:
        return RoomLoads(
            cluster=cluster,
            t_out_C=t_out_C,
            q_mod_W={room_id: 0.0 for room_id in weights},
            solved_u={kind: 0.0 for kind in BoundaryKind},
        )
    if total <= 0:
        raise InfeasibleAllocationError(
            f"{q_mod_W:.1f} W demand at t_out={t_out_C} but no room loses heat to the outside"
        )

    scale = q_mod_W / total
    return RoomLoads(
        cluster=cluster,
        t_out_C=t_out_C,
        q_mod_W={room_id: q_mod_W * weight / total for room_id, weight in weights.items()},
        solved_u={kind: scale * value for kind, value in relative.items()},
    )


def solve_room_loads_dense(
    building: BuildingModel,
    ratios: tuple[float, float, float],
    q_mod_W: float,
    t_out_C: float,
    *,
    cluster: int = 0,
    anchor: BoundaryKind = DEFAULT_ANCHOR,
) -> RoomLoads:
    """Assemble and solve the explicit linear system in the room loads and U-values.

    Unknowns are ``[q_1 .. q_n, U_wall, U_window, U_roof, U_floor_slab]``.
    Rows: one heat balance per room (``q_i = 0`` for unheated rooms), three
    U-ratio constraints and the demand closure.
    """

    if q_mod_W < 0:
        raise InfeasibleAllocationError(f"building demand must be non-negative, got {q_mod_W}")

    kinds = list(BoundaryKind)
    n = building.n_rooms
    matrix = np.zeros((n + 4, n + 4))
    rhs = np.zeros(n + 4)

    for i, room in enumerate(building.rooms):
        matrix[i, i] = 1.0
        if room.t_in_C > t_out_C:
            for boundary in room.boundaries:
                matrix[i, n + kinds.index(boundary.kind)] -= boundary.area_m2 * (room.t_in_C - t_out_C)

    anchor_column = n + kinds.index(anchor)
    others = [kind for kind in kinds if kind is not anchor]
    for row, (kind, ratio) in enumerate(zip(others, ratios), start=n):
        matrix[row, n + kinds.index(kind)] = 1.0
        matrix[row, anchor_column] = -ratio

    matrix[n + 3, :n] = 1.0
    rhs[n + 3] = q_mod_W

    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        if q_mod_W == 0:
            return solve_room_loads(building, ratios, 0.0, t_out_C, cluster=cluster, anchor=anchor)
        raise InfeasibleAllocationError(
            f"{q_mod_W:.1f} W demand at t_out={t_out_C} but no room loses heat to the outside"
        ) from exc

    return RoomLoads(
        cluster=cluster,
        t_out_C=t_out_C,
        q_mod_W={room.id: float(solution[i]) for i, room in enumerate(building.rooms)},
        solved_u={kind: float(solution[n + k]) for k, kind in enumerate(kinds)},
    )


def solve(
    building: BuildingModel,
    ratios: tuple[float, float, float],
    q_mod_W: float,
    t_out_C: float,
    *,
    cluster: int = 0,
    solver: LoadsSolver = "closed",
) -> RoomLoads:
    fn = solve_room_loads_dense if solver == "dense" else solve_room_loads
    return fn(building, ratios, q_mod_W, t_out_C, cluster=cluster)


def hallway_capacity(hallway: Room, assumed_t_sup_C: float) -> float:
    """Output of the hallway heaters when supplied at *assumed_t_sup_C*.

    Below nominal supply the spread shrinks with the supply excess over the
    room temperature, ``dT = dT_nom * (t_sup - t_in) / (t_sup_nom - t_in)``.
    """

    t_in = hallway.t_in_C
    if assumed_t_sup_C <= t_in:
        return 0.0

    capacity = 0.0
    for heater in hallway.heaters:
        ratio = min(1.0, (assumed_t_sup_C - t_in) / (heater.t_sup_nom_C - t_in))
        spread = heater.delta_t_nom_K * ratio
        lmtd_nom = lmtd(heater.t_sup_nom_C, heater.t_ret_nom_C, t_in)
        lmtd_assumed = lmtd(assumed_t_sup_C, assumed_t_sup_C - spread, t_in)
        capacity += heater.q_nom_W * (lmtd_assumed / lmtd_nom) ** heater.exponent_n
    return capacity


def partition_hallway_residual(
    loads: RoomLoads,
    building: BuildingModel,
    assumed_t_sup_C: float,
) -> RoomLoads:
    """Cap circulation rooms at their reduced-curve capacity and pass the excess on.

    The excess of each hallway or staircase goes to the rooms that declare a
    shared wall with it, in proportion to the shared area. A circulation room
    may itself receive excess from a neighbouring one, so passes repeat until
    every circulation room is within its capacity.
    """

    q_mod = dict(loads.q_mod_W)
    circulation = building.circulation_rooms()
    capacities = {hallway.id: hallway_capacity(hallway, assumed_t_sup_C) for hallway in circulation}
    residuals = {hallway.id: 0.0 for hallway in circulation}
    receivers = {
        hallway.id: {
            room.id: room.hallway_shared_wall_m2[hallway.id]
            for room in building.rooms
            if hallway.id in room.hallway_shared_wall_m2
        }
        for hallway in circulation
    }
    tolerance = RESIDUAL_TOLERANCE * max(1.0, abs(loads.total_W))

    for _ in range(MAX_RESIDUAL_PASSES):
        moved = False
        for hallway in circulation:
            residual = q_mod[hallway.id] - capacities[hallway.id]
            if residual <= tolerance:
                continue
            neighbours = receivers[hallway.id]
            if not neighbours:
                raise BuildingConfigurationError(
                    f"{hallway.room_type.value} {hallway.id!r} exceeds its capacity by {residual:.1f} W "
                    "but no room declares a shared wall with it"
                )
            shared_total = sum(neighbours.values())
            q_mod[hallway.id] = capacities[hallway.id]
            for room_id, area in neighbours.items():
                q_mod[room_id] += residual * area / shared_total
            residuals[hallway.id] += residual
            moved = True
        if not moved:
            break
    else:
        stuck = sorted(room_id for room_id in capacities if q_mod[room_id] - capacities[room_id] > tolerance)
        raise BuildingConfigurationError(
            f"Residual load keeps circulating between {', '.join(stuck)}; "
            "at least one of them needs a shared wall with a heated standard room"
        )

    for hallway in circulation:
        if residuals[hallway.id] > 0:
            log_event(
                LOGGER,
                level=logging.INFO,
                action="loads.hallway_residual",
                message=f"Moved {residuals[hallway.id]:.1f} W from {hallway.id} "
                f"to {len(receivers[hallway.id])} neighbour(s)",
                cluster=loads.cluster,
                t_out=loads.t_out_C,
            )

    return RoomLoads(
        cluster=loads.cluster,
        t_out_C=loads.t_out_C,
        q_mod_W=q_mod,
        solved_u=dict(loads.solved_u),
        hallway_residual_W=residuals,
        hallway_capacity_W=capacities,
    )


__all__ = [
    "LoadsSolver",
    "envelope_weights",
    "hallway_capacity",
    "partition_hallway_residual",
    "solve",
    "solve_room_loads",
    "solve_room_loads_dense",
]
