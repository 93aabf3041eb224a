"""Ego control: temporally extended policies over a low-level ACC.

The planner picks among five policies. Merge-in steers onto the main
lane while following the main-lane front neighbor; give-way brakes
until a chosen rear car has passed; the setpoint policies nudge the
ACC aggressiveness and last one decision window, as does maintain.

The longitudinal controller is the same interpolated car-following law
the drivers use, run against the policy's target and guarded by a
worst-case stopping check so the ego can never reach a front vehicle
even if that vehicle brakes at the physical limit. While the ego is on
the ramp a virtual stationary obstacle sits at the ramp end, which is
what makes it roll to a stop rather than drive off the pavement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from .driver import (
    idm_acceleration,
    FREE_ROAD_GAP,
    params_from_aggressiveness,
    DriverAnchors,
    DEFAULT_ANCHORS,
)
from .kinematics import (
    DT,
    RoadGeometry,
    VehicleAction,
    VehicleState,
    in_main_corridor,
    in_merge_zone,
    merge_complete,
)


class PolicyId(IntEnum):
    """Fixed enumeration order; also the expansion and tie-break order."""

    MERGE_IN = 0
    GIVE_WAY = 1
    INCREASE_SETPOINT = 2
    DECREASE_SETPOINT = 3
    MAINTAIN = 4


@dataclass(slots=True)
class EgoConfig:
    dt: float = DT
    decision_window: float = 1.0
    setpoint_delta: float = 0.3
    merge_speed: float = 0.75
    accel_limit: float = 6.0
    b_phys_leader: float = 9.0
    safety_margin: float = 2.0
    anchors: DriverAnchors | None = None

    def __post_init__(self):
        if self.anchors is None:
            self.anchors = DEFAULT_ANCHORS

    @property
    def steps_per_window(self) -> int:
        return round(self.decision_window / self.dt)


@dataclass(slots=True)
class EgoControllerState:
    """Agent-side bookkeeping that survives across decision steps."""

    psi: float = 0.5
    active: PolicyId | None = None
    steps_in_policy: int = 0
    give_way_target: int | None = None

    @property
    def elapsed(self) -> float:
        return self.steps_in_policy * DT

    def copy(self) -> "EgoControllerState":
        return EgoControllerState(self.psi, self.active, self.steps_in_policy,
                                  self.give_way_target)


def apply_setpoint_delta(psi: float, direction: int,
                         cfg: EgoConfig) -> float:
    """Shift the aggressiveness setpoint one notch, clamped to [0, 1]."""
    return min(1.0, max(0.0, psi + direction * cfg.setpoint_delta))


def available_policies(ego: VehicleState, psi: float,
                       road: RoadGeometry) -> list[PolicyId]:
    """Applicable policies in enumeration order."""
    out = []
    if in_merge_zone(ego, road) and not merge_complete(ego, road):
        out.append(PolicyId.MERGE_IN)
        out.append(PolicyId.GIVE_WAY)
    if psi < 1.0:
        out.append(PolicyId.INCREASE_SETPOINT)
    if psi > 0.0:
        out.append(PolicyId.DECREASE_SETPOINT)
    out.append(PolicyId.MAINTAIN)
    return out


def select_give_way_target(ego: VehicleState, vehicles,
                           road: RoadGeometry) -> int | None:
    """Nearest main-lane vehicle behind or abreast of the ego's
    projection at policy start; None when everyone is already ahead."""
    best = None
    best_x = -math.inf
    for i, v in enumerate(vehicles):
        if best_x < v.x <= ego.x and in_main_corridor(v, road):
            best, best_x = i, v.x
    return best


def start_policy(ctrl: EgoControllerState, policy: PolicyId, ego: VehicleState,
                 vehicles, road: RoadGeometry,
                 cfg: EgoConfig) -> EgoControllerState:
    """Activate a policy; setpoint shifts apply once, on activation."""
    psi = ctrl.psi
    if policy is PolicyId.INCREASE_SETPOINT:
        psi = apply_setpoint_delta(psi, +1, cfg)
    elif policy is PolicyId.DECREASE_SETPOINT:
        psi = apply_setpoint_delta(psi, -1, cfg)
    target = None
    if policy is PolicyId.GIVE_WAY:
        target = select_give_way_target(ego, vehicles, road)
    return EgoControllerState(psi=psi, active=policy, steps_in_policy=0,
                              give_way_target=target)


# ------------------------------------------------------------------ ACC

def _stopping_margin_after_step(gap: float, v_ego: float, v_lead: float,
                                accel: float, cfg: EgoConfig) -> float:
    """Worst-case clearance after applying accel for one step.

    The front vehicle is assumed to brake at the physical limit from now
    on; the ego applies accel for one step and then brakes as hard as it
    can. Positive means the ego still stops short of the front vehicle.
    """
    dt = cfg.dt
    b_l = cfg.b_phys_leader
    b_e = cfg.accel_limit
    if v_lead >= b_l * dt:
        lead_travel = v_lead * dt - 0.5 * b_l * dt * dt
        v_l2 = v_lead - b_l * dt
    else:
        lead_travel = v_lead * v_lead / (2.0 * b_l)
        v_l2 = 0.0
    v_e2 = v_ego + accel * dt
    if v_e2 < 0.0:
        t = v_ego / -accel
        ego_travel = v_ego * t + 0.5 * accel * t * t
        v_e2 = 0.0
    else:
        ego_travel = v_ego * dt + 0.5 * accel * dt * dt
    gap2 = gap + lead_travel - ego_travel
    return gap2 + v_l2 * v_l2 / (2.0 * b_l) - v_e2 * v_e2 / (2.0 * b_e)


def max_safe_accel(gap: float, v_ego: float, v_lead: float,
                   cfg: EgoConfig) -> float:
    """Largest acceleration that keeps the worst-case clearance.

    Falls back to full braking when even that cannot restore the margin;
    full braking never shrinks the clearance, so the margin is an
    invariant once established.
    """
    margin = cfg.safety_margin
    lo, hi = -cfg.accel_limit, cfg.accel_limit
    if _stopping_margin_after_step(gap, v_ego, v_lead, hi, cfg) >= margin:
        return hi
    if _stopping_margin_after_step(gap, v_ego, v_lead, lo, cfg) < margin:
        return lo
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _stopping_margin_after_step(gap, v_ego, v_lead, mid, cfg) >= margin:
            lo = mid
        else:
            hi = mid
    return lo


class TargetMode(IntEnum):
    FRONT = 0
    MERGE_FRONT = 1
    GIVE_WAY = 2


def _front_constraints(ego: VehicleState, vehicles, road: RoadGeometry,
                       mode: TargetMode) -> list[tuple[float, float]]:
    """(gap, speed) pairs for every obstacle the ego must not reach."""
    cons = []
    on_ramp_side = not in_main_corridor(ego, road)
    want_main = mode is TargetMode.MERGE_FRONT or not on_ramp_side
    if want_main:
        best = math.inf
        lead = None
        for v in vehicles:
            if ego.x < v.x < best and in_main_corridor(v, road):
                best, lead = v.x, v
        if lead is not None:
            cons.append((lead.x - ego.x, lead.vx))
    if on_ramp_side:
        best = math.inf
        lead = None
        for v in vehicles:
            if ego.x < v.x < best and not in_main_corridor(v, road):
                best, lead = v.x, v
        if lead is not None:
            cons.append((lead.x - ego.x, lead.vx))
        wall_gap = road.ramp_length - ego.x
        if wall_gap > 0.0:
            cons.append((wall_gap, 0.0))
    return cons


def acc_longitudinal(ego: VehicleState, vehicles, psi: float,
                     mode: TargetMode, road: RoadGeometry, cfg: EgoConfig,
                     give_way_target: int | None = None) -> float:
    """Longitudinal command for the current policy target.

    Tracking is the minimum of the car-following terms against every
    constraint; the stopping-distance guard then caps the result. A
    give-way target that has not passed yet is an obligation to fall
    behind, which means full braking until the gap opens.
    """
    params = params_from_aggressiveness(psi, cfg.anchors)
    cons = _front_constraints(ego, vehicles, road, mode)

    proposed = idm_acceleration(ego.vx, FREE_ROAD_GAP, 0.0, params)
    for gap, v_lead in cons:
        a = idm_acceleration(ego.vx, gap, ego.vx - v_lead, params)
        proposed = min(proposed, a)

    if mode is TargetMode.GIVE_WAY and give_way_target is not None:
        tgt = vehicles[give_way_target]
        gap = tgt.x - ego.x
        if gap <= 0.0:
            proposed = -cfg.accel_limit
        else:
            proposed = min(proposed, idm_acceleration(
                ego.vx, gap, ego.vx - tgt.vx, params))

    for gap, v_lead in cons:
        proposed = min(proposed, max_safe_accel(gap, ego.vx, v_lead, cfg))
    return min(max(proposed, -cfg.accel_limit), cfg.accel_limit)


# ------------------------------------------------------------- policies

def policy_action(policy: PolicyId, ego: VehicleState, vehicles,
                  ctrl: EgoControllerState, road: RoadGeometry,
                  cfg: EgoConfig) -> VehicleAction:
    """One-step command for the active policy, computed on observations."""
    if policy is PolicyId.MERGE_IN:
        ax = acc_longitudinal(ego, vehicles, ctrl.psi, TargetMode.MERGE_FRONT,
                              road, cfg)
        vy = math.copysign(cfg.merge_speed, road.lane_offset)
        return VehicleAction(ax=ax, vy=vy)
    if policy is PolicyId.GIVE_WAY:
        ax = acc_longitudinal(ego, vehicles, ctrl.psi, TargetMode.GIVE_WAY,
                              road, cfg, give_way_target=ctrl.give_way_target)
        return VehicleAction(ax=ax, vy=0.0)
    ax = acc_longitudinal(ego, vehicles, ctrl.psi, TargetMode.FRONT, road, cfg)
    return VehicleAction(ax=ax, vy=0.0)


def policy_terminated(policy: PolicyId, ego: VehicleState, vehicles,
                      ctrl: EgoControllerState, road: RoadGeometry,
                      cfg: EgoConfig) -> bool:
    """Termination test, evaluated after every simulation step."""
    if policy is PolicyId.MERGE_IN:
        return merge_complete(ego, road)
    if policy is PolicyId.GIVE_WAY:
        if ctrl.give_way_target is None:
            return True
        return vehicles[ctrl.give_way_target].x > ego.x
    return ctrl.steps_in_policy >= cfg.steps_per_window
