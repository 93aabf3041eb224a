"""Reward shaping and safety indicators for the merging task.

A decision step earns a goal bonus when it completes the merge, pays a
delay penalty otherwise, and pays separate penalties when any driver
brakes hard or the gap to the rear car on the main lane is unsafe.
Indicator flags are computed per simulation step and OR-accumulated
over a decision step, so a violation anywhere inside one policy
execution charges that decision exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .driver import TrafficState, main_lane_follower
from .kinematics import (
    VehicleState,
    in_main_corridor,
    merge_complete,
)


@dataclass(slots=True)
class RewardWeights:
    """Reward coefficients and the thresholds behind the indicators."""

    goal: float = 5.0
    delay: float = -0.3
    hard_brake: float = -5.0
    unsafe: float = -10.0
    ttc_min: float = 3.3
    tiv_min: float = 1.3
    b_hard: float = -4.0

    def bounds(self) -> tuple[float, float]:
        """Reachable one-step reward interval."""
        lo = min(self.goal, self.delay) + min(self.hard_brake, 0.0) + \
            min(self.unsafe, 0.0)
        hi = max(self.goal, self.delay) + max(self.hard_brake, 0.0) + \
            max(self.unsafe, 0.0)
        return lo, hi


@dataclass(slots=True)
class StepFlags:
    """Indicators accumulated over one decision step."""

    merged: bool = False
    hard_brake: bool = False
    unsafe: bool = False

    def absorb(self, merged: bool, hard_brake: bool, unsafe: bool):
        self.merged = self.merged or merged
        self.hard_brake = self.hard_brake or hard_brake
        self.unsafe = self.unsafe or unsafe


def ttc(ego: VehicleState, rear: VehicleState) -> float:
    """Time to collision with the rear vehicle; +inf when not closing."""
    closing = rear.vx - ego.vx
    if closing <= 0.0:
        return math.inf
    return (ego.x - rear.x) / closing


def tiv(ego: VehicleState, rear: VehicleState) -> float:
    """Inter-vehicle time: gap over the rear vehicle's speed."""
    if rear.vx <= 0.0:
        return math.inf
    return (ego.x - rear.x) / rear.vx


def safety_violated(traffic: TrafficState, weights: RewardWeights) -> bool:
    """Unsafe-state indicator against the nearest rear main-lane car.

    Callers arm this only while the ego is entering or inside the main
    corridor (see safety_check_armed); a car passing a waiting ego on
    the ramp is not a conflict.
    """
    rear = main_lane_follower(traffic.ego.x, traffic)
    if rear is None:
        return False
    return ttc(traffic.ego, rear) < weights.ttc_min or \
        tiv(traffic.ego, rear) < weights.tiv_min


def safety_check_armed(traffic: TrafficState, lateral_active: bool) -> bool:
    """Whether the unsafe-state check applies this step.

    Armed while the ego is steering toward the main lane or already
    laterally inside the corridor, until the merge completes. A merged
    ego is ordinary traffic and its follower's car-following law owns
    the gap from then on.
    """
    ego, road = traffic.ego, traffic.road
    if merge_complete(ego, road):
        return False
    return lateral_active or in_main_corridor(ego, road)


def hard_brake_any(driver_accels, weights: RewardWeights) -> bool:
    """True when any non-ego vehicle brakes at or beyond the hard limit."""
    return any(a <= weights.b_hard for a in driver_accels)


def decision_reward(flags: StepFlags, weights: RewardWeights) -> float:
    """Reward for one decision step from its accumulated flags.

    The step that completes the merge is exempt from the delay penalty.
    """
    r = weights.goal if flags.merged else weights.delay
    if flags.hard_brake:
        r += weights.hard_brake
    if flags.unsafe:
        r += weights.unsafe
    return r
