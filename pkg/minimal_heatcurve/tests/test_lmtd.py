from __future__ import annotations

import math

import numpy as np
import pytest

from minimal_heatcurve.errors import BuildingConfigurationError, LmtdDomainError
from minimal_heatcurve.lmtd import heater_requirements, heater_state, invert_supply_temp, lmtd, required_lmtd
from minimal_heatcurve.models import (
    Boundary,
    BoundaryKind,
    BuildingModel,
    Heater,
    Room,
    RoomLoads,
    RoomType,
)


def make_heater(heater_id: str = "h1", q_nom_W: float = 1000.0, t_sup: float = 70.0, t_ret: float = 55.0) -> Heater:
    return Heater(id=heater_id, q_nom_W=q_nom_W, t_sup_nom_C=t_sup, t_ret_nom_C=t_ret)


def make_room(room_id: str, *heaters: Heater, room_type: RoomType = RoomType.STANDARD, t_in_C: float = 20.0) -> Room:
    return Room(
        id=room_id,
        room_type=room_type,
        t_in_C=t_in_C,
        boundaries=(Boundary(BoundaryKind.WALL, 10.0),),
        heaters=heaters,
    )


def make_loads(**q_mod_W: float) -> RoomLoads:
    return RoomLoads(cluster=0, t_out_C=0.0, q_mod_W=dict(q_mod_W), solved_u={})


def _bisect_supply(lmtd_required: float, delta_t: float, t_in: float) -> float:
    low, high = t_in + delta_t + 1e-12, t_in + delta_t + 10 * lmtd_required + 100.0
    for _ in range(200):
        mid = (low + high) / 2.0
        if lmtd(mid, mid - delta_t, t_in) < lmtd_required:
            low = mid
        else:
            high = mid
    return (low + high) / 2.0


def test_lmtd_spot_values() -> None:
    assert lmtd(70, 55, 20) == pytest.approx(15 / math.log(50 / 35), rel=1e-12)
    assert lmtd(70, 55, 20) == pytest.approx(42.0585, abs=5e-3)
    assert lmtd(90, 70, 20) == pytest.approx(20 / math.log(70 / 50), rel=1e-12)
    assert lmtd(90, 70, 20) == pytest.approx(59.4394, abs=5e-3)


def test_lmtd_equal_temperatures_use_the_limit() -> None:
    assert lmtd(60, 60, 20) == 40.0
    assert lmtd(60 + 1e-10, 60, 20) == pytest.approx(40.0, abs=1e-9)
    # continuous across the switch to the arithmetic mean
    assert lmtd(60 + 1e-6, 60, 20) == pytest.approx(40.0, abs=1e-6)


@pytest.mark.parametrize(("t_sup", "t_ret", "t_in"), [(70, 20, 20), (70, 15, 20), (19, 18, 20)])
def test_lmtd_domain(t_sup: float, t_ret: float, t_in: float) -> None:
    with pytest.raises(LmtdDomainError):
        lmtd(t_sup, t_ret, t_in)


def test_required_lmtd() -> None:
    nominal = lmtd(90, 70, 20)
    assert required_lmtd(1000, 1000, 1.3, nominal) == nominal
    assert required_lmtd(0, 1000, 1.3, nominal) == 0.0
    half = required_lmtd(500, 1000, 1.3, nominal)
    assert half == pytest.approx(0.5 ** (1 / 1.3) * nominal, rel=1e-12)
    assert half == pytest.approx(34.886, abs=1.5e-2)
    assert required_lmtd(300, 1000, 1.3, nominal) == pytest.approx(23.516, abs=3e-2)
    # loads above nominal follow the same power law
    assert required_lmtd(2000, 1000, 1.0, nominal) == pytest.approx(2 * nominal)

    with pytest.raises(LmtdDomainError):
        required_lmtd(-1, 1000, 1.3, nominal)
    with pytest.raises(LmtdDomainError):
        required_lmtd(100, 0, 1.3, nominal)


def test_invert_nominal_point() -> None:
    assert invert_supply_temp(lmtd(70, 55, 20), 15, 20) == pytest.approx(70.0, abs=1e-9)
    assert invert_supply_temp(0.0, 15, 20) == 20.0


def test_invert_roundtrip_over_random_conditions() -> None:
    rng = np.random.default_rng(20210104)
    for _ in range(10_000):
        t_in = rng.uniform(15.0, 24.0)
        delta_t = rng.uniform(1.0, 30.0)
        t_ret = t_in + rng.uniform(0.5, 60.0)
        t_sup = t_ret + delta_t
        recovered = invert_supply_temp(lmtd(t_sup, t_ret, t_in), delta_t, t_in)
        assert recovered == pytest.approx(t_sup, abs=1e-6)


def test_invert_huge_lmtd_uses_series_limit() -> None:
    t_sup = invert_supply_temp(1e9, 10.0, 20.0)
    assert t_sup == pytest.approx(20.0 + 1e9 + 5.0, rel=1e-12)


def test_invert_is_monotone_in_lmtd() -> None:
    values = [invert_supply_temp(lmtd_required, 15.0, 20.0) for lmtd_required in np.linspace(0.5, 80.0, 200)]
    assert np.all(np.diff(values) > 0)


def test_invert_rejects_bad_inputs() -> None:
    with pytest.raises(LmtdDomainError):
        invert_supply_temp(-1.0, 10.0, 20.0)
    with pytest.raises(LmtdDomainError):
        invert_supply_temp(10.0, 0.0, 20.0)


def test_nominal_load_reproduces_nominal_supply() -> None:
    heater = make_heater(t_sup=75.0, t_ret=65.0)
    state = heater_state(heater, make_room("r1", heater), 1000.0)
    assert state.lmtd_required_K == state.lmtd_nom_K
    assert state.t_sup_required_C == pytest.approx(75.0, abs=1e-9)


def test_oversized_heater_runs_cooler() -> None:
    heater = make_heater(q_nom_W=2000.0, t_sup=55.0, t_ret=45.0)
    state = heater_state(heater, make_room("r1", heater), 500.0)
    expected = _bisect_supply(state.lmtd_required_K, 10.0, 20.0)
    assert state.t_sup_required_C == pytest.approx(expected, abs=1e-6)
    assert 30.0 < state.t_sup_required_C < 55.0


def test_required_supply_grows_with_load() -> None:
    heater = make_heater()
    room = make_room("r1", heater)
    supplies = [heater_state(heater, room, q).t_sup_required_C for q in (100.0, 400.0, 800.0, 1200.0)]
    assert supplies == sorted(supplies)
    assert supplies[-1] > 70.0


def test_equal_split_between_heaters() -> None:
    room = make_room("r1", make_heater("a"), make_heater("b", q_nom_W=500.0))
    building = BuildingModel("B", "MFH_F", (room,))
    states = heater_requirements(make_loads(r1=1000.0), building)
    assert [state.q_required_W for state in states] == [500.0, 500.0]
    # the smaller heater needs the hotter water
    assert states[1].t_sup_required_C > states[0].t_sup_required_C


def test_capacity_split_between_heaters() -> None:
    room = make_room("r1", make_heater("a"), make_heater("b", q_nom_W=500.0))
    building = BuildingModel("B", "MFH_F", (room,))
    states = heater_requirements(make_loads(r1=900.0), building, split="capacity")
    assert [state.q_required_W for state in states] == pytest.approx([600.0, 300.0])
    assert states[0].t_sup_required_C == pytest.approx(states[1].t_sup_required_C)


def test_circulation_rooms_are_skipped() -> None:
    hall = make_room("hall", make_heater("hh"), room_type=RoomType.HALLWAY)
    room = make_room("r1", make_heater("h1"))
    states = heater_requirements(make_loads(hall=300.0, r1=300.0), BuildingModel("B", "MFH_F", (hall, room)))
    assert [state.heater_id for state in states] == ["h1"]


def test_heaterless_room() -> None:
    building = BuildingModel("B", "MFH_F", (make_room("r1"), make_room("r2", make_heater())))
    with pytest.raises(BuildingConfigurationError):
        heater_requirements(make_loads(r1=100.0, r2=100.0), building)
    states = heater_requirements(make_loads(r1=0.0, r2=100.0), building)
    assert len(states) == 1
