"""The six comparison agents sharing one simulator and reward.

Five are tree searches differing only in what they believe about the
hidden driver parameters: the filtering agent (lvt) tracks a posterior
and keeps refining it inside the tree, the omniscient one reads the
true internals, the prior agent samples fresh drivers from the flat
prior forever, the normal-style agent assumes every driver is average,
and the certainty-equivalent agent (qmdp) keeps the posterior but
freezes a single sample per search iteration. The sixth is a memoryless
threshold rule with no search at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .belief import GridBelief, HypothesisGrid, NoiseScales, StaticBelief
from .driver import TrafficState, main_lane_follower, make_internal
from .ego import EgoConfig, EgoControllerState, PolicyId
from .errors import InvalidStateError
from .kinematics import in_merge_zone, lateral_displacement
from .objective import RewardWeights, tiv, ttc
from .planner import Planner, PlannerConfig
from .rng import RandomStream


class AgentKind(Enum):
    """Closed set of decision-makers; values double as CLI names."""

    LVT = "lvt"
    OMNISCIENT = "omniscient"
    MCTS_PRIOR = "mcts-prior"
    MCTS_NORMAL = "mcts-normal"
    QMDP = "qmdp"
    RULE_BASED = "rule-based"


PLANNING_KINDS = frozenset(k for k in AgentKind if k is not AgentKind.RULE_BASED)

FILTERING_KINDS = frozenset({AgentKind.LVT, AgentKind.QMDP})
"""Kinds that fold executed trajectories back into their belief."""

TTC_CENSOR_SECONDS = 10.0
"""Merge events with a longer time to collision carry no threat signal
and only stretch the distribution tail, so they are dropped before
percentiles are taken."""


@dataclass(slots=True)
class RuleThresholds:
    """Gap-acceptance thresholds for the rule-based agent.

    Defaults are the 50th percentile of observed merge events; the 10th
    percentile pair (3.3, 1.3) is the permissive end of the sweep.
    """

    ttc_safe: float = 5.6
    tiv_safe: float = 2.5

    def __post_init__(self):
        if self.ttc_safe <= 0.0 or self.tiv_safe <= 0.0:
            raise InvalidStateError(f"thresholds must be positive: {self}")


SHIPPED_THRESHOLDS = {
    50: RuleThresholds(5.6, 2.5),
    10: RuleThresholds(3.3, 1.3),
}


def percentile_thresholds(ttc_values, tiv_values,
                          percentile: float) -> RuleThresholds:
    """Empirical thresholds from recorded merge events.

    Uses the linear-interpolation percentile convention. Non-finite
    entries and times to collision beyond TTC_CENSOR_SECONDS are
    excluded before ranking.
    """
    ttc_arr = np.asarray(list(ttc_values), dtype=float)
    tiv_arr = np.asarray(list(tiv_values), dtype=float)
    ttc_arr = ttc_arr[np.isfinite(ttc_arr) & (ttc_arr <= TTC_CENSOR_SECONDS)]
    tiv_arr = tiv_arr[np.isfinite(tiv_arr)]
    if ttc_arr.size == 0 or tiv_arr.size == 0:
        raise InvalidStateError(
            "no merge events left after censoring; cannot take percentiles")
    return RuleThresholds(
        ttc_safe=float(np.percentile(ttc_arr, percentile)),
        tiv_safe=float(np.percentile(tiv_arr, percentile)))


def rule_based_decide(traffic: TrafficState, ctrl: EgoControllerState,
                      thresholds: RuleThresholds) -> PolicyId:
    """Memoryless gap-acceptance rule, meant to be re-evaluated every step.

    Inside the merge zone the rule merges when both safety clocks against
    the rear main-lane car beat their thresholds and gives way otherwise;
    outside the zone it holds its lane. A merge that has already crossed
    half the lane offset is committed and carries through even if the
    gaps collapse behind it.
    """
    ego, road = traffic.ego, traffic.road
    if ctrl.active is PolicyId.MERGE_IN and \
            lateral_displacement(ego, road) >= 0.5 * abs(road.lane_offset):
        return PolicyId.MERGE_IN
    if not in_merge_zone(ego, road):
        return PolicyId.MAINTAIN
    rear = main_lane_follower(ego.x, traffic)
    if rear is None or (ttc(ego, rear) > thresholds.ttc_safe
                        and tiv(ego, rear) > thresholds.tiv_safe):
        return PolicyId.MERGE_IN
    return PolicyId.GIVE_WAY


def planner_config_for(kind: AgentKind, iterations: int,
                       noise: NoiseScales | None) -> PlannerConfig:
    """Search settings that define each planning baseline.

    Only the filtering agent pays for in-tree observation noise and
    belief updates; the others keep their belief fixed during descent,
    and the certainty-equivalent agent additionally holds one hidden
    sample per iteration.
    """
    if kind is AgentKind.LVT:
        return PlannerConfig(iterations=iterations, update_beliefs=True,
                             observation_noise=noise)
    if kind is AgentKind.QMDP:
        return PlannerConfig(iterations=iterations, update_beliefs=False,
                             observation_noise=None,
                             single_hidden_sample=True)
    if kind in PLANNING_KINDS:
        return PlannerConfig(iterations=iterations, update_beliefs=False,
                             observation_noise=None)
    raise InvalidStateError(f"{kind} does not run a search")


class BaselineAgent:
    """One decision-maker: a search configuration plus its belief.

    The belief starts flat and, for the filtering kinds, absorbs every
    executed trajectory via record_transition. The omniscient agent has
    no stored belief; it reads the true internals off the traffic state
    at each decision.
    """

    def __init__(self, kind: AgentKind, n_vehicles: int, road,
                 stream: RandomStream | None = None, iterations: int = 150,
                 noise: NoiseScales | None = None,
                 ego_config: EgoConfig | None = None,
                 rewards: RewardWeights | None = None,
                 thresholds: RuleThresholds | None = None):
        self.kind = kind
        self.road = road
        self.ego_config = ego_config if ego_config is not None else EgoConfig()
        self.rewards = rewards if rewards is not None else RewardWeights()
        self.thresholds = thresholds if thresholds is not None \
            else RuleThresholds()
        self.planner = None
        self.belief = None
        if kind is AgentKind.RULE_BASED:
            if self.thresholds.ttc_safe < self.rewards.ttc_min or \
                    self.thresholds.tiv_safe < self.rewards.tiv_min:
                raise InvalidStateError(
                    "rule thresholds sit below the unsafe-state cutoffs")
            return
        if stream is None:
            raise InvalidStateError("planning agents need a random stream")
        cfg = planner_config_for(kind, iterations, noise)
        self.planner = Planner(cfg, self.ego_config, self.rewards, stream)
        if kind in FILTERING_KINDS:
            self.belief = GridBelief.uniform(n_vehicles, road)
        elif kind is AgentKind.MCTS_PRIOR:
            self.belief = StaticBelief(n_vehicles)
        elif kind is AgentKind.MCTS_NORMAL:
            self.belief = StaticBelief(
                n_vehicles,
                internals=tuple(make_internal(0.5) for _ in range(n_vehicles)))

    @property
    def reconsiders_every_step(self) -> bool:
        return self.kind is AgentKind.RULE_BASED

    def anchor(self, observation):
        """Pin the filter's transition chain to an episode's first observation."""
        if self.kind in FILTERING_KINDS:
            b = self.belief
            self.belief = GridBelief(b.grid, b.road, b.probs, observation,
                                     b.history)

    def decision_belief(self, traffic: TrafficState):
        """Belief handed to the search for this decision."""
        if self.kind is AgentKind.OMNISCIENT:
            return StaticBelief(len(traffic.vehicles),
                                internals=tuple(traffic.internals))
        return self.belief

    def decide(self, traffic: TrafficState, ctrl: EgoControllerState):
        """Pick the next policy; returns (policy, search root or None)."""
        if self.kind is AgentKind.RULE_BASED:
            return rule_based_decide(traffic, ctrl, self.thresholds), None
        return self.planner.plan(traffic, ctrl, self.decision_belief(traffic))

    def record_transition(self, trajectory):
        """Fold one executed policy's action/observation run into the belief."""
        if self.kind in FILTERING_KINDS and trajectory:
            self.belief = self.belief.updated(tuple(trajectory))
