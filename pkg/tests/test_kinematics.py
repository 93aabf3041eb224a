import math

import pytest
from hypothesis import given, strategies as st

from mergesim.errors import InvalidStateError
from mergesim.kinematics import (
    DT,
    RoadGeometry,
    VehicleAction,
    VehicleState,
    in_main_corridor,
    in_merge_zone,
    lateral_displacement,
    merge_complete,
    step_vehicle,
)
from oracles import step_oracle


def test_step_accelerating():
    s = step_vehicle(VehicleState(0.0, 0.0, 10.0), VehicleAction(2.0, 0.0))
    assert s.x == pytest.approx(1.01, abs=1e-12)
    assert s.vx == pytest.approx(10.2, abs=1e-12)
    assert s.y == 0.0


def test_step_braking_to_stop_truncates_position():
    # vx=0.45 under ax=-9 stops after 0.05 s; the vehicle must not roll back.
    s = step_vehicle(VehicleState(0.0, 0.0, 0.45), VehicleAction(-9.0, 0.0),
                     dt=0.1)
    assert s.vx == 0.0
    assert s.x == pytest.approx(0.01125, abs=1e-12)


def test_step_lateral_motion():
    s = step_vehicle(VehicleState(5.0, 0.0, 12.0), VehicleAction(0.0, 0.75))
    assert s.y == pytest.approx(0.075, abs=1e-12)
    assert s.x == pytest.approx(6.2, abs=1e-12)


def test_step_rejects_non_finite():
    with pytest.raises(InvalidStateError):
        step_vehicle(VehicleState(math.nan, 0.0, 1.0), VehicleAction(0.0))
    with pytest.raises(InvalidStateError):
        step_vehicle(VehicleState(0.0, 0.0, 1.0), VehicleAction(math.inf))


finite_state = st.builds(
    VehicleState,
    x=st.floats(-1e5, 1e5),
    y=st.floats(-10.0, 10.0),
    vx=st.floats(0.0, 60.0),
)
finite_action = st.builds(
    VehicleAction,
    ax=st.floats(-9.0, 9.0),
    vy=st.floats(-1.0, 1.0),
)


@given(finite_state, finite_action)
def test_step_matches_oracle(state, action):
    got = step_vehicle(state, action)
    ox, oy, ovx = step_oracle(state.x, state.y, state.vx, action.ax,
                              action.vy, DT)
    assert got.x == pytest.approx(ox, abs=1e-9)
    assert got.y == pytest.approx(oy, abs=1e-9)
    assert got.vx == pytest.approx(ovx, abs=1e-9)


@given(finite_state, finite_action)
def test_step_speed_never_negative(state, action):
    assert step_vehicle(state, action).vx >= 0.0


@given(finite_state, st.floats(-9.0, 9.0))
def test_two_half_steps_compose(state, ax):
    # Constant acceleration: stepping twice with dt/2 lands on the same
    # state as one full step, up to float roundoff.
    action = VehicleAction(ax, 0.3)
    half = step_vehicle(step_vehicle(state, action, DT / 2), action, DT / 2)
    full = step_vehicle(state, action, DT)
    if half.vx > 0.0 and full.vx > 0.0:
        assert half.x == pytest.approx(full.x, abs=1e-9)
        assert half.vx == pytest.approx(full.vx, abs=1e-9)


def test_merge_zone_boundaries_inclusive():
    road = RoadGeometry()
    assert road.merge_zone_start == pytest.approx(100.0)
    assert in_merge_zone(VehicleState(100.0, 0.0, 10.0), road)
    assert in_merge_zone(VehicleState(200.0, 0.0, 10.0), road)
    assert not in_merge_zone(VehicleState(99.999, 0.0, 10.0), road)
    assert not in_merge_zone(VehicleState(200.001, 0.0, 10.0), road)


def test_merge_complete_window():
    road = RoadGeometry()
    assert merge_complete(VehicleState(150.0, 3.66, 10.0), road)
    assert merge_complete(VehicleState(150.0, 3.7, 10.0), road)
    assert not merge_complete(VehicleState(150.0, 3.6, 10.0), road)
    assert not merge_complete(VehicleState(150.0, 0.0, 10.0), road)


def test_main_corridor_membership():
    road = RoadGeometry()
    assert not in_main_corridor(VehicleState(0.0, 0.0, 10.0), road)
    assert not in_main_corridor(VehicleState(0.0, 1.84, 10.0), road)
    assert in_main_corridor(VehicleState(0.0, 1.85, 10.0), road)
    assert in_main_corridor(VehicleState(0.0, 3.7, 10.0), road)
    assert lateral_displacement(VehicleState(0.0, 1.2, 10.0), road) == \
        pytest.approx(1.2)


def test_lateral_arrival_window_wider_than_one_step():
    # One lateral step at the merge speed must not be able to jump across
    # the arrival window, otherwise completion could be skipped.
    road = RoadGeometry()
    assert 0.75 * DT < 2.0 * road.lateral_arrival_tolerance


def test_road_geometry_validation():
    with pytest.raises(InvalidStateError):
        RoadGeometry(merge_zone_length=300.0)
    with pytest.raises(InvalidStateError):
        RoadGeometry(main_lane_center_y=0.0)
