"""Online tree search over temporally extended driving policies.

Monte Carlo tree search in belief space. Action nodes are the ego's
high-level policies; running one to termination inside the generative
model produces the next observation node. Double progressive widening
keeps the branching over sampled observation outcomes bounded so deep
lookahead stays possible with few iterations. Each observation node
carries the belief implied by the imagined history, so sampled futures
stay consistent with what the ego would actually have learned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .belief import ActionObservation, NoiseScales, generative_step
from .driver import TrafficState
from .ego import (
    EgoConfig,
    EgoControllerState,
    PolicyId,
    available_policies,
    policy_action,
    policy_terminated,
    start_policy,
)
from .errors import SimulationIntegrityError
from .kinematics import merge_complete
from .objective import (
    RewardWeights,
    StepFlags,
    decision_reward,
    hard_brake_any,
    safety_check_armed,
    safety_violated,
)
from .rng import RandomStream

MAX_POLICY_SECONDS = 60.0
"""Cap on one policy's execution; a policy that never terminates inside
this budget ends the imagined branch with value zero."""


@dataclass(slots=True)
class PlannerConfig:
    iterations: int = 64
    max_depth: int = 15
    ucb_scale: float = 5.0
    widen_k: float = 2.0
    widen_alpha: float = 0.1
    discount: float = 0.9
    update_beliefs: bool = True
    observation_noise: NoiseScales | None = field(default_factory=NoiseScales)
    single_hidden_sample: bool = False
    """Draw the hidden states once per iteration at the root and keep them
    for the whole descent (certainty-equivalent planning)."""
    policy_cap_seconds: float = MAX_POLICY_SECONDS


class PolicyNode:
    __slots__ = ("policy", "visits", "value", "children")

    def __init__(self, policy: PolicyId):
        self.policy = policy
        self.visits = 0
        self.value = 0.0
        self.children: list[ObservationNode] = []


class ObservationNode:
    """Belief-space node: cached post-policy physical state plus the
    belief and controller state the imagined history implies."""

    __slots__ = ("physical", "ctrl", "belief", "flags", "terminal",
                 "visits", "arms", "unexpanded")

    def __init__(self, physical: TrafficState, ctrl: EgoControllerState,
                 belief, flags: StepFlags, terminal: bool):
        self.physical = physical
        self.ctrl = ctrl
        self.belief = belief
        self.flags = flags
        self.terminal = terminal
        self.visits = 0
        self.arms: list[PolicyNode] = []
        self.unexpanded: list[PolicyId] | None = None


@dataclass(slots=True)
class PlannerStats:
    iterations: int = 0
    observation_nodes: int = 1
    belief_updates: int = 0
    policy_executions: int = 0


def _backup(node: ObservationNode, arm: PolicyNode, total: float) -> None:
    """Post-order visit counting and incremental-mean value update."""
    node.visits += 1
    arm.visits += 1
    arm.value += (total - arm.value) / arm.visits


class Planner:
    def __init__(self, config: PlannerConfig, ego_config: EgoConfig,
                 rewards: RewardWeights, stream: RandomStream):
        self.config = config
        self.ego_config = ego_config
        self.rewards = rewards
        self.stream = stream
        self.stats = PlannerStats()
        self._forced_internals = None

    def plan(self, physical: TrafficState, ctrl: EgoControllerState,
             belief) -> tuple[PolicyId, ObservationNode]:
        """Pick the policy to run next from the current belief state.

        Returns the chosen policy and the search root (kept for
        introspection; the tree is rebuilt from scratch each decision).
        """
        root = ObservationNode(physical, ctrl, belief,
                               StepFlags(), terminal=False)
        self.stats = PlannerStats()
        self._forced_internals = None
        for _ in range(self.config.iterations):
            self.stats.iterations += 1
            if self.config.single_hidden_sample:
                self._forced_internals = belief.sample(self.stream)
            self._simulate(root, self.config.max_depth)
        best = max(root.arms,
                   key=lambda arm: (arm.value, -arm.policy))
        return best.policy, root

    # --- search ------------------------------------------------------------

    def _simulate(self, node: ObservationNode, depth: int) -> float:
        if depth == 0 or node.terminal:
            return 0.0
        cfg = self.config
        arm = self._select_arm(node)
        limit = cfg.widen_k * arm.visits ** cfg.widen_alpha
        if len(arm.children) <= limit:
            child, reward = self._expand(node, arm)
            total = reward if child.terminal else \
                reward + cfg.discount * self._rollout(child, depth - 1)
        else:
            child = arm.children[self.stream.pick_index(len(arm.children))]
            reward = decision_reward(child.flags, self.rewards)
            total = reward + cfg.discount * self._simulate(child, depth - 1)
        _backup(node, arm, total)
        return total

    def _select_arm(self, node: ObservationNode) -> PolicyNode:
        """Arm-side progressive widening, then UCB1.

        A new policy arm (next in enumeration order) is admitted while
        |arms| <= k*N^alpha; a fresh arm scores +inf so it is tried
        immediately. Ties resolve to the earliest-enumerated arm.
        """
        if node.unexpanded is None:
            node.unexpanded = available_policies(
                node.physical.ego, node.ctrl.psi, node.physical.road)
        cfg = self.config
        if node.unexpanded and \
                len(node.arms) <= cfg.widen_k * node.visits ** cfg.widen_alpha:
            arm = PolicyNode(node.unexpanded.pop(0))
            node.arms.append(arm)
            return arm
        log_n = math.log(node.visits)
        best, best_score = None, -math.inf
        for arm in node.arms:
            if arm.visits == 0:
                return arm
            score = arm.value + self.config.ucb_scale * \
                math.sqrt(log_n / arm.visits)
            if score > best_score:
                best, best_score = arm, score
        return best

    def _expand(self, node: ObservationNode,
                arm: PolicyNode) -> tuple[ObservationNode, float]:
        """Sample hidden states from the node belief, run the policy to
        termination in the generative model, and attach the outcome."""
        internals = self._forced_internals if \
            self._forced_internals is not None else \
            node.belief.sample(self.stream)
        world = node.physical.copy_physical().with_internals(list(internals))
        outcome = self._run_policy(world, node.ctrl, arm.policy,
                                   collect=self.config.update_beliefs)
        physical, ctrl, trajectory, flags, terminal = outcome
        belief = node.belief
        if self.config.update_beliefs and trajectory:
            belief = belief.updated(trajectory)
            self.stats.belief_updates += 1
        child = ObservationNode(physical, ctrl, belief, flags, terminal)
        arm.children.append(child)
        self.stats.observation_nodes += 1
        return child, decision_reward(flags, self.rewards)

    def _run_policy(self, world: TrafficState, ctrl: EgoControllerState,
                    policy: PolicyId, collect: bool):
        """Execute one policy to termination inside the model.

        Returns (state, ctrl, action/observation pairs, accumulated step
        flags, terminal). Safety flags accumulate over every 0.1 s tick;
        exceeding the execution cap or an internal overlap ends the
        branch as terminal. collect=False skips observation generation
        for searches that never condition on them.
        """
        cfg = self.ego_config
        ctrl = start_policy(ctrl, policy, world.ego, world.vehicles,
                            world.road, cfg)
        flags = StepFlags()
        trajectory = []
        max_steps = int(round(self.config.policy_cap_seconds / cfg.dt))
        self.stats.policy_executions += 1
        lateral = policy is PolicyId.MERGE_IN
        noise = self.config.observation_noise if collect else None
        while True:
            act = policy_action(policy, world.ego, world.vehicles, ctrl,
                                world.road, cfg)
            try:
                out = generative_step(world, act, self.stream, noise,
                                      observe=collect)
            except SimulationIntegrityError:
                flags.absorb(merged=False, hard_brake=False, unsafe=True)
                return world, ctrl, tuple(trajectory), flags, True
            world = out.state
            ctrl.steps_in_policy += 1
            if collect:
                trajectory.append(ActionObservation(act, out.observation))
            armed = safety_check_armed(world, lateral)
            flags.absorb(
                merged=merge_complete(world.ego, world.road),
                hard_brake=hard_brake_any(out.driver_accels, self.rewards),
                unsafe=armed and safety_violated(world, self.rewards))
            if flags.unsafe or flags.merged:
                return world, ctrl, tuple(trajectory), flags, True
            if policy_terminated(policy, world.ego, world.vehicles, ctrl,
                                 world.road, cfg):
                return world, ctrl, tuple(trajectory), flags, False
            if ctrl.steps_in_policy >= max_steps:
                return world, ctrl, tuple(trajectory), flags, True

    def _rollout(self, node: ObservationNode, depth: int) -> float:
        """Default value estimate: uniformly random applicable policies,
        hidden states redrawn from the leaf belief for each segment."""
        world = node.physical
        ctrl = node.ctrl
        total, discount = 0.0, 1.0
        for _ in range(depth):
            options = available_policies(world.ego, ctrl.psi, world.road)
            policy = options[self.stream.pick_index(len(options))]
            sampled = self._forced_internals if \
                self._forced_internals is not None else \
                node.belief.sample(self.stream)
            segment = world.copy_physical().with_internals(list(sampled))
            world, ctrl, _, flags, terminal = \
                self._run_policy(segment, ctrl, policy, collect=False)
            total += discount * decision_reward(flags, self.rewards)
            discount *= self.config.discount
            if terminal:
                break
        return total
