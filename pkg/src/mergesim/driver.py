"""Main-road driver behavior.

Every non-ego vehicle follows an intelligent-driver car-following law
whose parameters interpolate between a timid and an aggressive anchor
according to a hidden aggressiveness value in [0, 1]. Whether a driver
additionally reacts to the merging ego is decided by a time-to-merge
comparison; an attentive driver in yielding mode blends a second
car-following term computed against the ego's projection onto the main
lane. The same functions serve the ground-truth simulator and the
planner's generative model, so the planner's imagination matches the
world exactly when its hypothesis about a driver is right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidStateError
from .kinematics import (
    RoadGeometry,
    VehicleAction,
    VehicleState,
    in_main_corridor,
)

FREE_ROAD_GAP = 1e9
"""Gap substituted when a vehicle has no front neighbor."""

B_HARD_PHYSICAL = 9.0
"""Absolute braking limit in m/s^2; no commanded deceleration exceeds it."""

TTM_SPEED_FLOOR = 0.1
"""Speed floor for time-to-merge; slower vehicles are treated as stopped."""


@dataclass(slots=True)
class IdmParams:
    """Car-following parameters: setpoint speed, jam gap, time headway,
    comfortable acceleration and braking."""

    v_des: float
    d_min: float
    t_des: float
    a_max: float
    b_max: float

    def __post_init__(self):
        if min(self.v_des, self.d_min, self.t_des,
               self.a_max, self.b_max) <= 0.0:
            raise InvalidStateError(f"non-positive driver parameter in {self}")


@dataclass(slots=True)
class DriverAnchors:
    """Endpoints of the aggressiveness interpolation."""

    timid: IdmParams = field(default_factory=lambda: IdmParams(
        v_des=19.4, d_min=4.0, t_des=2.0, a_max=0.8, b_max=1.0))
    aggressive: IdmParams = field(default_factory=lambda: IdmParams(
        v_des=30.0, d_min=1.0, t_des=0.5, a_max=2.0, b_max=3.0))
    speed_cap: float = 30.0

    def __post_init__(self):
        if max(self.timid.v_des, self.aggressive.v_des) > self.speed_cap:
            raise InvalidStateError("anchor setpoint exceeds the speed cap")


DEFAULT_ANCHORS = DriverAnchors()


def params_from_aggressiveness(psi: float,
                               anchors: DriverAnchors = DEFAULT_ANCHORS
                               ) -> IdmParams:
    """Linear interpolation between the timid and aggressive anchors."""
    if not 0.0 <= psi <= 1.0:
        raise InvalidStateError(f"aggressiveness {psi} outside [0, 1]")
    lo, hi = anchors.timid, anchors.aggressive
    return IdmParams(
        v_des=lo.v_des + (hi.v_des - lo.v_des) * psi,
        d_min=lo.d_min + (hi.d_min - lo.d_min) * psi,
        t_des=lo.t_des + (hi.t_des - lo.t_des) * psi,
        a_max=lo.a_max + (hi.a_max - lo.a_max) * psi,
        b_max=lo.b_max + (hi.b_max - lo.b_max) * psi,
    )


@dataclass(slots=True)
class InternalState:
    """Hidden per-driver state: behavior weights plus following params.

    w_l weighs the reaction to the real front neighbor and is always 1
    for simulated drivers. w_m is the capacity to attend to the merging
    ego; it only takes effect while the cooperation rule says the driver
    is yielding, so a driver with w_m = 0 never reacts to the ego.
    """

    idm: IdmParams
    psi: float
    w_l: float = 1.0
    w_m: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.w_l <= 1.0 and 0.0 <= self.w_m <= 1.0):
            raise InvalidStateError("behavior weights must lie in [0, 1]")


def make_internal(psi: float, attentive: bool = True,
                  anchors: DriverAnchors = DEFAULT_ANCHORS) -> InternalState:
    return InternalState(idm=params_from_aggressiveness(psi, anchors),
                         psi=psi, w_l=1.0, w_m=1.0 if attentive else 0.0)


def idm_desired_gap(vx: float, dvx: float, params: IdmParams) -> float:
    """Speed- and approach-dependent desired gap.

    dvx is the approach rate (own speed minus leader speed). The result
    can drop below the jam gap when the gap is opening fast; that is
    intentional and feeds the acceleration term unclamped.
    """
    return params.d_min + params.t_des * vx + \
        vx * dvx / (2.0 * math.sqrt(params.a_max * params.b_max))


def idm_acceleration(vx: float, gap: float, dvx: float, params: IdmParams,
                     b_phys: float = B_HARD_PHYSICAL) -> float:
    """Car-following acceleration toward the setpoint speed.

    The free-road term pulls toward v_des, the interaction term repels
    from the desired gap. Output is clamped to [-b_phys, a_max].
    """
    if gap <= 0.0:
        raise InvalidStateError(f"non-positive gap {gap}")
    d_des = params.d_min + params.t_des * vx + \
        vx * dvx / (2.0 * math.sqrt(params.a_max * params.b_max))
    ratio = vx / params.v_des
    acc = params.a_max * (1.0 - ratio * ratio * ratio * ratio
                          - (d_des / gap) * (d_des / gap))
    if acc < -b_phys:
        return -b_phys
    if acc > params.a_max:
        return params.a_max
    return acc


class CidmMode(Enum):
    YIELDING = "yielding"
    PASSING = "passing"


def time_to_merge(state: VehicleState, road: RoadGeometry,
                  agent: bool) -> float:
    """Seconds until the vehicle reaches the end of the merge zone.

    Main-road vehicles that already passed the merge point no longer
    interact with the merge and get +inf. Stopped vehicles never arrive.
    """
    dist = road.merge_zone_end - state.x
    if not agent and dist < 0.0:
        return math.inf
    if dist <= 0.0:
        return 0.0
    if state.vx <= 0.0:
        return math.inf
    return dist / max(state.vx, TTM_SPEED_FLOOR)


def cidm_mode(ttm_agent: float, ttm_vehicle: float, psi: float) -> CidmMode:
    """Cooperation rule: yield when the agent reaches the merge point
    early enough relative to the driver, scaled down by aggressiveness."""
    if psi >= 1.0:
        threshold = 0.0
    elif math.isinf(ttm_vehicle):
        threshold = math.inf
    else:
        threshold = (1.0 - psi) * ttm_vehicle
    return CidmMode.YIELDING if ttm_agent < threshold else CidmMode.PASSING


def mixed_acceleration(acc_leader: float, acc_merge: float,
                       w_l: float, w_m: float) -> float:
    """Weighted sum of the two attention targets."""
    return w_l * acc_leader + w_m * acc_merge


@dataclass(slots=True)
class TrafficState:
    """Full simulator state: ego plus every driver's physical and hidden
    state, tied to one road geometry. Lists are index-aligned."""

    t: float
    ego: VehicleState
    vehicles: list[VehicleState]
    internals: list[InternalState]
    road: RoadGeometry

    def copy_physical(self) -> "TrafficState":
        """Copy with fresh physical states; internals are shared."""
        return TrafficState(
            t=self.t,
            ego=VehicleState(self.ego.x, self.ego.y, self.ego.vx),
            vehicles=[VehicleState(v.x, v.y, v.vx) for v in self.vehicles],
            internals=list(self.internals),
            road=self.road,
        )

    def with_internals(self, internals: list[InternalState]) -> "TrafficState":
        return TrafficState(t=self.t, ego=self.ego, vehicles=self.vehicles,
                            internals=internals, road=self.road)


def main_lane_leader(x: float, traffic: TrafficState,
                     skip: int = -1) -> VehicleState | None:
    """Nearest vehicle ahead of x in the main-lane corridor.

    The ego counts once it is laterally closer to the main lane than to
    the ramp, which is also the moment it stops being a ramp vehicle.
    """
    best = None
    best_x = math.inf
    for i, v in enumerate(traffic.vehicles):
        if i != skip and x < v.x < best_x and \
                in_main_corridor(v, traffic.road):
            best, best_x = v, v.x
    ego = traffic.ego
    if x < ego.x < best_x and in_main_corridor(ego, traffic.road):
        best = ego
    return best


def main_lane_follower(x: float, traffic: TrafficState) -> VehicleState | None:
    """Nearest main-corridor vehicle behind or abreast of x (ego excluded)."""
    best = None
    best_x = -math.inf
    for v in traffic.vehicles:
        if best_x < v.x <= x and in_main_corridor(v, traffic.road):
            best, best_x = v, v.x
    return best


def driver_action(index: int, traffic: TrafficState) -> VehicleAction:
    """Acceleration command for one driver.

    The leader term always applies. The merge term applies only when the
    cooperation rule says yielding, the ego is still on the ramp side,
    and the ego's projection is strictly ahead; its weight is the
    driver's attentiveness capacity. The executed value respects the
    same physical envelope as its components.
    """
    v = traffic.vehicles[index]
    internal = traffic.internals[index]
    params = internal.idm

    leader = main_lane_leader(v.x, traffic, skip=index)
    if leader is None:
        acc_leader = idm_acceleration(v.vx, FREE_ROAD_GAP, 0.0, params)
    else:
        acc_leader = idm_acceleration(v.vx, leader.x - v.x,
                                      v.vx - leader.vx, params)

    ego = traffic.ego
    road = traffic.road
    w_m_eff = 0.0
    acc_merge = acc_leader
    if internal.w_m > 0.0 and ego.x > v.x and \
            not in_main_corridor(ego, road):
        ttm_agent = time_to_merge(ego, road, agent=True)
        ttm_vehicle = time_to_merge(v, road, agent=False)
        if cidm_mode(ttm_agent, ttm_vehicle, internal.psi) is CidmMode.YIELDING:
            w_m_eff = internal.w_m
            acc_merge = idm_acceleration(v.vx, ego.x - v.x,
                                         v.vx - ego.vx, params)

    ax = mixed_acceleration(acc_leader, acc_merge, internal.w_l, w_m_eff)
    if ax < -B_HARD_PHYSICAL:
        ax = -B_HARD_PHYSICAL
    elif ax > params.a_max:
        ax = params.a_max
    return VehicleAction(ax=ax, vy=0.0)
