"""Road geometry and point-mass vehicle kinematics.

Vehicles are point masses on a straight two-lane layout: a main lane and
a parallel on-ramp that ends at the merge point. Longitudinal motion is
constant-acceleration over one step; lateral motion is constant-speed.
All modules share the 0.1 s step defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidStateError

DT = 0.1
"""Simulation step in seconds."""


@dataclass(slots=True)
class RoadGeometry:
    """Static description of the merge layout.

    The ramp and the main lane share a longitudinal origin. The merge
    zone is the final stretch of the ramp, from which the lane change
    onto the main lane is allowed; it ends where the ramp ends.
    """

    main_road_length: float = 500.0
    ramp_length: float = 200.0
    merge_zone_length: float = 100.0
    lane_width: float = 3.7
    ramp_lane_center_y: float = 0.0
    main_lane_center_y: float = 3.7
    lateral_arrival_tolerance: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.merge_zone_length <= self.ramp_length):
            raise InvalidStateError(
                "merge zone must be positive and fit inside the ramp")
        if self.ramp_length > self.main_road_length:
            raise InvalidStateError("ramp cannot outlast the main road")
        if self.main_lane_center_y == self.ramp_lane_center_y:
            raise InvalidStateError("lanes must be laterally separated")
        # The lane change covers half the lane offset per decision window;
        # the arrival window has to be wider than one lateral step or the
        # crossing could skip over it.
        if self.lateral_arrival_tolerance <= 0.0:
            raise InvalidStateError("arrival tolerance must be positive")

    @property
    def merge_zone_start(self) -> float:
        return self.ramp_length - self.merge_zone_length

    @property
    def merge_zone_end(self) -> float:
        return self.ramp_length

    @property
    def lane_offset(self) -> float:
        return self.main_lane_center_y - self.ramp_lane_center_y


@dataclass(slots=True)
class VehicleState:
    """Point-mass state: longitudinal position/speed and lateral position."""

    x: float
    y: float
    vx: float

    def validate(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.vx)):
            raise InvalidStateError(f"non-finite vehicle state {self}")
        if self.vx < 0.0:
            raise InvalidStateError(f"negative speed in {self}")


@dataclass(slots=True)
class VehicleAction:
    """Commanded longitudinal acceleration and lateral speed."""

    ax: float
    vy: float = 0.0

    def validate(self, accel_limit: float = 9.0):
        if not (math.isfinite(self.ax) and math.isfinite(self.vy)):
            raise InvalidStateError(f"non-finite action {self}")
        if abs(self.ax) > accel_limit + 1e-12:
            raise InvalidStateError(
                f"|ax|={abs(self.ax):.3f} exceeds limit {accel_limit}")


def step_vehicle(state: VehicleState, action: VehicleAction,
                 dt: float = DT) -> VehicleState:
    """Advance one step of constant-acceleration longitudinal motion.

    Speeds never go negative: when braking would cross zero inside the
    step, the position update is truncated at the stopping time.
    """
    state.validate()
    action.validate()
    vx = state.vx + action.ax * dt
    if vx < 0.0:
        # Stop partway through the step instead of rolling backwards.
        t_stop = state.vx / -action.ax if action.ax < 0.0 else 0.0
        x = state.x + state.vx * t_stop + 0.5 * action.ax * t_stop * t_stop
        vx = 0.0
    else:
        x = state.x + state.vx * dt + 0.5 * action.ax * dt * dt
    y = state.y + action.vy * dt
    return VehicleState(x=x, y=y, vx=vx)


def in_merge_zone(state: VehicleState, road: RoadGeometry) -> bool:
    """Longitudinal containment in the merge zone, boundaries included."""
    return road.merge_zone_start <= state.x <= road.merge_zone_end


def merge_complete(state: VehicleState, road: RoadGeometry) -> bool:
    """True once the vehicle has laterally arrived at the main lane."""
    return abs(state.y - road.main_lane_center_y) <= road.lateral_arrival_tolerance


def in_main_corridor(state: VehicleState, road: RoadGeometry) -> bool:
    """True when the vehicle is laterally closer to the main lane than
    to the ramp, i.e. it occupies the main lane for interaction purposes."""
    return abs(state.y - road.main_lane_center_y) <= 0.5 * abs(road.lane_offset)


def lateral_displacement(state: VehicleState, road: RoadGeometry) -> float:
    """Distance moved from the ramp center toward the main lane."""
    return abs(state.y - road.ramp_lane_center_y)
