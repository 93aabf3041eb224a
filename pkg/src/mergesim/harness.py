"""Closed-loop episodes, scenario generation, evaluation, persistence.

An episode runs the chosen agent against the ground-truth simulator at
10 Hz: the agent picks a temporally extended policy, the policy runs
until its own termination condition fires, the filtering agents absorb
the executed action/observation run, and the next decision follows
immediately. The rule-based agent instead re-evaluates its rule every
step. Episodes end on merge completion, end of road, or the time limit;
a safety violation is recorded but does not stop the clock.

Everything is reproducible bit for bit from (master seed, episode
index): the scenario draw, the observation noise, and the search all
use separate streams spawned from that pair. Traces persist as CSV (one
row per 0.1 s step, wide per-vehicle columns), decisions and metrics as
JSON; every artifact carries a format tag so readers can fail loudly on
schema drift.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import (
    AgentKind,
    BaselineAgent,
    FILTERING_KINDS,
    RuleThresholds,
    rule_based_decide,
)
from .belief import (
    ActionObservation,
    GridBelief,
    NoiseScales,
    generative_step,
    observation_of,
)
from .driver import (
    TrafficState,
    idm_desired_gap,
    main_lane_follower,
    make_internal,
    params_from_aggressiveness,
)
from .ego import EgoConfig, EgoControllerState, PolicyId, policy_action, \
    policy_terminated, start_policy
from .errors import InvalidStateError, SchemaError, SimulationIntegrityError
from .kinematics import (
    RoadGeometry,
    VehicleAction,
    VehicleState,
    in_main_corridor,
    merge_complete,
    step_vehicle,
)
from .objective import (
    RewardWeights,
    StepFlags,
    decision_reward,
    hard_brake_any,
    safety_check_armed,
    safety_violated,
    tiv,
    ttc,
)
from .rng import RandomStream, spawn_streams

TRACE_FORMAT = "mergesim.trace.v1"
EPISODE_FORMAT = "mergesim.episode.v1"
METRICS_FORMAT = "mergesim.metrics.v1"
SCENARIO_FORMAT = "mergesim.scenario.v1"
EVENTS_FORMAT = "mergesim.merge-events.v1"
THRESHOLD_SWEEP_FORMAT = "mergesim.threshold-sweep.v1"

WORKERS_ENV = "MERGESIM_WORKERS"

DEFAULT_TIME_LIMIT = 40.0
DEFAULT_ITERATIONS = 150

_SCENARIO_STREAM, _SIM_STREAM, _PLAN_STREAM = 0, 1, 2


# --------------------------------------------------------------- scenarios

@dataclass(slots=True)
class VehicleSpec:
    """Initial condition for one simulated driver."""

    x: float
    y: float
    vx: float
    psi: float | str = "random"
    attentive: bool = True


@dataclass(slots=True)
class ScenarioConfig:
    """Everything needed to reconstruct an episode's initial conditions."""

    ego_x: float
    ego_vx: float
    vehicles: list[VehicleSpec]
    road: RoadGeometry = field(default_factory=RoadGeometry)
    noise: NoiseScales | None = field(default_factory=NoiseScales)
    overrides: dict[float, dict[int, float]] = field(default_factory=dict)
    time_limit: float = DEFAULT_TIME_LIMIT
    name: str = ""

    def validate(self):
        road = self.road
        if not (0.0 <= self.ego_x < road.ramp_length):
            raise InvalidStateError(f"ego x={self.ego_x} must sit on the ramp")
        if self.ego_vx < 0.0:
            raise InvalidStateError("ego cannot start moving backwards")
        for i, v in enumerate(self.vehicles):
            if v.vx < 0.0:
                raise InvalidStateError(f"vehicle {i} has negative speed")
            if v.psi != "random" and not 0.0 <= float(v.psi) <= 1.0:
                raise InvalidStateError(
                    f"vehicle {i} aggressiveness {v.psi} outside [0, 1]")
        bodies = [VehicleState(self.ego_x, road.ramp_lane_center_y,
                               self.ego_vx)]
        bodies += [VehicleState(v.x, v.y, v.vx) for v in self.vehicles]
        for i in range(len(bodies)):
            for j in range(i + 1, len(bodies)):
                if in_main_corridor(bodies[i], road) != \
                        in_main_corridor(bodies[j], road):
                    continue
                if bodies[i].x == bodies[j].x:
                    raise InvalidStateError(
                        f"bodies {i} and {j} overlap at x={bodies[i].x}")
        for t, moves in self.overrides.items():
            if not 0.0 <= float(t) <= self.time_limit:
                raise InvalidStateError(f"override at t={t} outside episode")
            for idx, psi in moves.items():
                if not 0 <= int(idx) < len(self.vehicles):
                    raise InvalidStateError(f"override targets vehicle {idx}")
                if not 0.0 <= float(psi) <= 1.0:
                    raise InvalidStateError(
                        f"override aggressiveness {psi} outside [0, 1]")

    def build_traffic(self, stream: RandomStream) -> TrafficState:
        """Concrete initial state; unresolved aggressiveness draws here."""
        internals = []
        vehicles = []
        for v in self.vehicles:
            psi = float(stream.uniform()) if v.psi == "random" \
                else float(v.psi)
            internals.append(make_internal(psi, attentive=v.attentive))
            vehicles.append(VehicleState(x=v.x, y=v.y, vx=v.vx))
        ego = VehicleState(x=self.ego_x, y=self.road.ramp_lane_center_y,
                           vx=self.ego_vx)
        return TrafficState(t=0.0, ego=ego, vehicles=vehicles,
                            internals=internals, road=self.road)

    def to_dict(self) -> dict:
        return {
            "format": SCENARIO_FORMAT,
            "name": self.name,
            "ego": {"x": self.ego_x, "vx": self.ego_vx},
            "vehicles": [
                {"x": v.x, "y": v.y, "vx": v.vx, "psi": v.psi,
                 "attentive": v.attentive} for v in self.vehicles],
            "road": {
                "main_road_length": self.road.main_road_length,
                "ramp_length": self.road.ramp_length,
                "merge_zone_length": self.road.merge_zone_length,
                "lane_width": self.road.lane_width,
                "ramp_lane_center_y": self.road.ramp_lane_center_y,
                "main_lane_center_y": self.road.main_lane_center_y,
                "lateral_arrival_tolerance":
                    self.road.lateral_arrival_tolerance,
            },
            "noise": None if self.noise is None else
                {"sigma_x": self.noise.sigma_x, "sigma_y": self.noise.sigma_y},
            "overrides": {
                str(t): {str(i): psi for i, psi in moves.items()}
                for t, moves in self.overrides.items()},
            "time_limit": self.time_limit,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if data.get("format") != SCENARIO_FORMAT:
            raise SchemaError(
                f"expected {SCENARIO_FORMAT}, got {data.get('format')!r}")
        road = RoadGeometry(**data["road"]) if "road" in data else \
            RoadGeometry()
        noise = data.get("noise")
        cfg = cls(
            ego_x=float(data["ego"]["x"]),
            ego_vx=float(data["ego"]["vx"]),
            vehicles=[VehicleSpec(
                x=float(v["x"]), y=float(v["y"]), vx=float(v["vx"]),
                psi=v.get("psi", "random") if v.get("psi") == "random"
                    else float(v.get("psi", 0.5)),
                attentive=bool(v.get("attentive", True)))
                for v in data["vehicles"]],
            road=road,
            noise=None if noise is None else NoiseScales(**noise),
            overrides={
                float(t): {int(i): float(p) for i, p in moves.items()}
                for t, moves in data.get("overrides", {}).items()},
            time_limit=float(data.get("time_limit", DEFAULT_TIME_LIMIT)),
            name=data.get("name", ""))
        cfg.validate()
        return cfg


def load_scenario(path) -> ScenarioConfig:
    with open(path) as fh:
        return ScenarioConfig.from_dict(json.load(fh))


def save_scenario(cfg: ScenarioConfig, path):
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def generate_random_scenario(seed) -> ScenarioConfig:
    """Random main-lane platoon plus the ego on the ramp.

    Vehicle count is uniform on {4..7} and aggressiveness uniform on
    [0, 1]. Neighboring speeds stay within 3 m/s of each other, every
    spacing covers the rear driver's desired gap at its spawn speed, and
    drivers behind the ego's lane projection keep that same margin to
    the projection, so no driver begins mid-emergency.
    """
    stream = RandomStream(np.random.default_rng(np.random.SeedSequence(seed)))
    road = RoadGeometry()
    n = 4 + stream.pick_index(4)
    ego_x = float(40.0 + 40.0 * stream.uniform())
    ego_vx = float(8.0 + 7.0 * stream.uniform())

    x = -30.0 + 40.0 * stream.uniform()
    vx = 14.0 + 10.0 * stream.uniform()
    specs = [VehicleSpec(x=float(x), y=road.main_lane_center_y,
                         vx=float(vx), psi=float(stream.uniform()))]
    for _ in range(n - 1):
        rear = specs[-1]
        lo, hi = max(14.0, rear.vx - 3.0), min(24.0, rear.vx + 3.0)
        vx = lo + (hi - lo) * stream.uniform()
        params = params_from_aggressiveness(rear.psi)
        want = max(idm_desired_gap(rear.vx, rear.vx - vx, params),
                   params.d_min)
        x += want * (1.1 + 0.9 * stream.uniform()) + 4.0
        specs.append(VehicleSpec(x=float(x), y=road.main_lane_center_y,
                                 vx=float(vx), psi=float(stream.uniform())))

    # Yielding drivers treat the projection as a leader from t=0, so a
    # vehicle spawned inside its desired gap to the ego would open the
    # episode with an emergency stop. Slide the rear group back to fit.
    shift = 0.0
    for spec in specs:
        if spec.x >= ego_x:
            continue
        params = params_from_aggressiveness(spec.psi)
        want = max(idm_desired_gap(spec.vx, spec.vx - ego_vx, params),
                   params.d_min)
        shift = max(shift, want - (ego_x - spec.x))
    if shift > 0.0:
        specs = [VehicleSpec(x=s.x - shift, y=s.y, vx=s.vx, psi=s.psi)
                 if s.x < ego_x else s for s in specs]

    specs.reverse()  # rear-to-front construction; store front first
    cfg = ScenarioConfig(ego_x=ego_x, ego_vx=ego_vx, vehicles=specs,
                         road=road, name="random")
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- episodes

@dataclass(slots=True)
class DecisionRecord:
    t: float
    policy: PolicyId
    arms: list[tuple[PolicyId, int, float]] | None
    belief: list[dict] | None

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "policy": self.policy.name,
            "arms": None if self.arms is None else [
                {"policy": p.name, "visits": v, "value": q}
                for p, v, q in self.arms],
            "belief": self.belief,
        }


@dataclass(slots=True)
class EpisodeResult:
    agent: str
    iterations: int | None
    master_seed: int
    episode_index: int
    scenario_name: str
    n_vehicles: int
    outcome: str                      # merged | timeout | safety-violated
    final_time: float
    merge_time: float | None
    reward: float
    violated: bool
    hard_brake: bool
    gave_way: bool
    merge_event: tuple[float, float] | None   # (ttc, tiv) at lane entry
    decisions: list[DecisionRecord]
    trace: list[list] | None
    integrity_error: str | None = None

    def to_dict(self) -> dict:
        return {
            "format": EPISODE_FORMAT,
            "agent": self.agent,
            "iterations": self.iterations,
            "master_seed": self.master_seed,
            "episode_index": self.episode_index,
            "scenario": self.scenario_name,
            "n_vehicles": self.n_vehicles,
            "outcome": self.outcome,
            "final_time": self.final_time,
            "merge_time": self.merge_time,
            "reward": self.reward,
            "violated": self.violated,
            "hard_brake": self.hard_brake,
            "gave_way": self.gave_way,
            "merge_event": None if self.merge_event is None else {
                "ttc": _json_float(self.merge_event[0]),
                "tiv": _json_float(self.merge_event[1])},
            "decisions": [d.to_dict() for d in self.decisions],
            "integrity_error": self.integrity_error,
        }


def _json_float(v: float):
    return v if math.isfinite(v) else None


def _belief_snapshot(agent: BaselineAgent):
    if agent.kind not in FILTERING_KINDS:
        return None
    b = agent.belief
    n = b.probs.shape[0]
    return [{"aggressiveness": b.aggressiveness_marginal(i).tolist(),
             "attentive": b.attentive_marginal(i)} for i in range(n)]


def trace_columns(n_vehicles: int) -> list[str]:
    cols = ["schema", "t", "policy", "ego_x", "ego_y", "ego_vx", "ego_ax",
            "ego_vy", "merged", "hard_brake", "unsafe"]
    for i in range(n_vehicles):
        cols += [f"v{i}_x", f"v{i}_y", f"v{i}_vx", f"v{i}_ax"]
    return cols


def _trace_row(state: TrafficState, policy, act, accels, flags):
    row = [TRACE_FORMAT, state.t]
    if act is None:
        # final row: terminal state only, no transition out of it
        row += ["", state.ego.x, state.ego.y, state.ego.vx, "", "",
                "", "", ""]
        for v in state.vehicles:
            row += [v.x, v.y, v.vx, ""]
    else:
        row += [policy.name, state.ego.x, state.ego.y, state.ego.vx,
                act.ax, act.vy, int(flags[0]), int(flags[1]), int(flags[2])]
        for v, a in zip(state.vehicles, accels):
            row += [v.x, v.y, v.vx, a]
    return row


def run_episode(scenario: ScenarioConfig, kind: AgentKind,
                iterations: int | None = DEFAULT_ITERATIONS,
                master_seed: int = 0, episode_index: int = 0,
                thresholds: RuleThresholds | None = None,
                ego_config: EgoConfig | None = None,
                rewards: RewardWeights | None = None,
                record_trace: bool = True) -> EpisodeResult:
    """Run one closed-loop episode; deterministic in all arguments."""
    scenario.validate()
    road = scenario.road
    init_stream = spawn_streams(master_seed, episode_index, _SCENARIO_STREAM)
    sim_stream = spawn_streams(master_seed, episode_index, _SIM_STREAM)
    plan_stream = spawn_streams(master_seed, episode_index, _PLAN_STREAM)

    traffic = scenario.build_traffic(init_stream)
    n = len(traffic.vehicles)
    agent = BaselineAgent(kind, n, road, stream=plan_stream,
                          iterations=iterations or DEFAULT_ITERATIONS,
                          noise=scenario.noise, ego_config=ego_config,
                          rewards=rewards, thresholds=thresholds)
    rewards = agent.rewards
    ego_cfg = agent.ego_config
    observe = kind in FILTERING_KINDS
    if observe:
        agent.anchor(observation_of(traffic, sim_stream, scenario.noise))

    ctrl = EgoControllerState()
    pending = sorted((float(t), dict(m)) for t, m in
                     scenario.overrides.items())
    rows = [] if record_trace else None
    decisions: list[DecisionRecord] = []
    total_reward = 0.0
    violated = hard_any = gave_way = False
    merge_time = None
    merge_event = None
    entry_event = None
    was_inside = in_main_corridor(traffic.ego, road)
    integrity_error = None
    done = False

    while not done:
        policy, root = agent.decide(traffic, ctrl)
        ctrl = start_policy(ctrl, policy, traffic.ego, traffic.vehicles,
                            road, ego_cfg)
        arms = None if root is None else [
            (a.policy, a.visits, a.value)
            for a in sorted(root.arms, key=lambda a: a.policy)]
        decisions.append(DecisionRecord(traffic.t, policy, arms,
                                        _belief_snapshot(agent)))
        if policy is PolicyId.GIVE_WAY:
            gave_way = True
        seg_flags = StepFlags()
        trajectory = []

        while True:
            while pending and traffic.t >= pending[0][0] - 1e-9:
                _, moves = pending.pop(0)
                internals = list(traffic.internals)
                for idx, psi in moves.items():
                    internals[idx] = make_internal(
                        psi, attentive=traffic.internals[idx].w_m > 0.0)
                traffic = TrafficState(t=traffic.t, ego=traffic.ego,
                                       vehicles=traffic.vehicles,
                                       internals=internals, road=road)
            act = policy_action(policy, traffic.ego, traffic.vehicles, ctrl,
                                road, ego_cfg)
            try:
                out = generative_step(traffic, act, sim_stream,
                                      noise=scenario.noise if observe else None,
                                      observe=observe)
            except SimulationIntegrityError as err:
                violated = True
                integrity_error = str(err)
                done = True
                break
            step_hard = hard_brake_any(out.driver_accels, rewards)
            prev = traffic
            traffic = out.state
            ctrl.steps_in_policy += 1
            if observe:
                trajectory.append(ActionObservation(act, out.observation))
            inside = in_main_corridor(traffic.ego, road)
            if inside and not was_inside:
                # Proximity to the new follower is sampled as the ego
                # crosses into the lane, before the follower's reaction
                # has had time to reopen the gap.
                rear = main_lane_follower(traffic.ego.x, traffic)
                entry_event = None if rear is None else (
                    ttc(traffic.ego, rear), tiv(traffic.ego, rear))
            was_inside = inside
            armed = safety_check_armed(traffic, policy is PolicyId.MERGE_IN)
            step_merged = merge_complete(traffic.ego, road)
            step_unsafe = armed and safety_violated(traffic, rewards)
            seg_flags.absorb(step_merged, step_hard, step_unsafe)
            hard_any = hard_any or step_hard
            violated = violated or step_unsafe
            if rows is not None:
                rows.append(_trace_row(prev, policy, act, out.driver_accels,
                                       (step_merged, step_hard, step_unsafe)))
            if step_merged:
                merge_time = traffic.t
                merge_event = entry_event
                done = True
                break
            if traffic.t >= scenario.time_limit - 1e-9 or \
                    traffic.ego.x >= road.main_road_length:
                done = True
                break
            if agent.reconsiders_every_step:
                desired = rule_based_decide(traffic, ctrl, agent.thresholds)
                if desired is not policy or policy_terminated(
                        policy, traffic.ego, traffic.vehicles, ctrl, road,
                        ego_cfg):
                    break
            elif policy_terminated(policy, traffic.ego, traffic.vehicles,
                                   ctrl, road, ego_cfg):
                break

        total_reward += decision_reward(seg_flags, rewards)
        agent.record_transition(trajectory)

    if rows is not None:
        rows.append(_trace_row(traffic, None, None, None, None))
    outcome = "safety-violated" if violated else \
        "merged" if merge_time is not None else "timeout"
    return EpisodeResult(
        agent=kind.value, iterations=None if kind is AgentKind.RULE_BASED
        else iterations, master_seed=master_seed,
        episode_index=episode_index, scenario_name=scenario.name,
        n_vehicles=n, outcome=outcome, final_time=traffic.t,
        merge_time=merge_time, reward=total_reward, violated=violated,
        hard_brake=hard_any, gave_way=gave_way, merge_event=merge_event,
        decisions=decisions, trace=rows, integrity_error=integrity_error)


# -------------------------------------------------------------- persistence

def write_trace_csv(result: EpisodeResult, path):
    if result.trace is None:
        raise InvalidStateError("episode was run without trace recording")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_columns(result.n_vehicles))
        writer.writerows(result.trace)


def read_trace_csv(path) -> list[dict]:
    """Typed trace rows; raises SchemaError on tag or layout drift."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        rows = list(reader)
    n = sum(1 for c in cols if c.endswith("_ax") and c.startswith("v"))
    if cols != trace_columns(n):
        raise SchemaError(f"unexpected trace columns in {path}")
    out = []
    for raw in rows:
        if raw["schema"] != TRACE_FORMAT:
            raise SchemaError(
                f"expected {TRACE_FORMAT}, got {raw['schema']!r} in {path}")
        row = {"policy": raw["policy"]}
        for key, val in raw.items():
            if key in ("schema", "policy"):
                continue
            if key in ("merged", "hard_brake", "unsafe"):
                row[key] = None if val == "" else bool(int(val))
            else:
                row[key] = None if val == "" else float(val)
        out.append(row)
    return out


def write_episode_json(result: EpisodeResult, path):
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def validate_trace(rows: list[dict], n_vehicles: int,
                   tol: float = 1e-9) -> None:
    """Replay check: every logged transition obeys the motion equations."""
    for k in range(len(rows) - 1):
        cur, nxt = rows[k], rows[k + 1]
        if abs((nxt["t"] - cur["t"]) - 0.1) > tol:
            raise InvalidStateError(f"non-uniform timestamps at row {k}")
        ego = step_vehicle(
            VehicleState(cur["ego_x"], cur["ego_y"], cur["ego_vx"]),
            VehicleAction(ax=cur["ego_ax"], vy=cur["ego_vy"]))
        if abs(ego.x - nxt["ego_x"]) > tol or \
                abs(ego.y - nxt["ego_y"]) > tol or \
                abs(ego.vx - nxt["ego_vx"]) > tol:
            raise InvalidStateError(f"ego replay diverged at row {k}")
        for i in range(n_vehicles):
            v = step_vehicle(
                VehicleState(cur[f"v{i}_x"], cur[f"v{i}_y"],
                             cur[f"v{i}_vx"]),
                VehicleAction(ax=cur[f"v{i}_ax"]))
            if abs(v.x - nxt[f"v{i}_x"]) > tol or \
                    abs(v.vx - nxt[f"v{i}_vx"]) > tol:
                raise InvalidStateError(
                    f"vehicle {i} replay diverged at row {k}")


# -------------------------------------------------------------- evaluation

@dataclass(slots=True)
class MetricsSummary:
    agent: str
    iterations: int | None
    episodes: int
    safety_violation_rate: float
    mean_reward: float
    se_reward: float
    mean_merge_time: float | None
    se_merge_time: float | None
    hard_brake_rate: float
    give_way_rate: float
    merged_rate: float

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "iterations": self.iterations,
            "episodes": self.episodes,
            "safety_violation_rate": self.safety_violation_rate,
            "mean_reward": self.mean_reward,
            "se_reward": self.se_reward,
            "mean_merge_time": self.mean_merge_time,
            "se_merge_time": self.se_merge_time,
            "hard_brake_rate": self.hard_brake_rate,
            "give_way_rate": self.give_way_rate,
            "merged_rate": self.merged_rate,
        }


def _mean_se(values) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = 0.0 if arr.size < 2 else \
        float(arr.std(ddof=1) / math.sqrt(arr.size))
    return mean, se


def summarize(results: list[EpisodeResult]) -> MetricsSummary:
    """Aggregate one (agent, iteration-count) cell of the evaluation."""
    n = len(results)
    merge_times = [r.merge_time for r in results
                   if r.merge_time is not None and not r.violated]
    mean_reward, se_reward = _mean_se([r.reward for r in results])
    mean_merge, se_merge = _mean_se(merge_times)
    return MetricsSummary(
        agent=results[0].agent,
        iterations=results[0].iterations,
        episodes=n,
        safety_violation_rate=sum(r.violated for r in results) / n,
        mean_reward=mean_reward,
        se_reward=se_reward,
        mean_merge_time=mean_merge,
        se_merge_time=se_merge,
        hard_brake_rate=sum(r.hard_brake for r in results) / n,
        give_way_rate=sum(r.gave_way for r in results) / n,
        merged_rate=sum(r.merge_time is not None for r in results) / n)


def episode_scenario(master_seed: int, index: int) -> ScenarioConfig:
    """The random scenario evaluate() assigns to one episode slot."""
    return generate_random_scenario((master_seed, index, _SCENARIO_STREAM))


def _eval_task(args) -> EpisodeResult:
    kind_value, iterations, master_seed, index = args
    return run_episode(episode_scenario(master_seed, index),
                       AgentKind(kind_value), iterations=iterations,
                       master_seed=master_seed, episode_index=index,
                       record_trace=False)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidStateError(f"{WORKERS_ENV}={raw!r} is not an integer")


def evaluate(kinds, n_episodes: int = 100,
             sweep=(1, 4, 16, 64, 256, 1024), master_seed: int = 0,
             out_dir=None, workers: int | None = None,
             collect_results: bool = False):
    """Iteration sweep over shared random scenarios.

    Every agent sees the same scenario list, generated from (master
    seed, episode index) alone, so comparisons are paired. Returns the
    list of MetricsSummary cells, ordered by (agent, iterations);
    optionally also the raw per-episode results.
    """
    kinds = [k if isinstance(k, AgentKind) else AgentKind(k) for k in kinds]
    tasks = []
    for kind in kinds:
        counts = [None] if kind is AgentKind.RULE_BASED else list(sweep)
        for iters in counts:
            tasks += [(kind.value, iters, master_seed, i)
                      for i in range(n_episodes)]
    workers = worker_count() if workers is None else max(1, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            episode_results = list(pool.map(_eval_task, tasks,
                                            chunksize=4))
    else:
        episode_results = [_eval_task(t) for t in tasks]

    cells: dict[tuple, list[EpisodeResult]] = {}
    for res in episode_results:
        cells.setdefault((res.agent, res.iterations), []).append(res)
    summaries = [summarize(group) for group in cells.values()]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_metrics_json(summaries, os.path.join(out_dir, "metrics.json"),
                           master_seed=master_seed, episodes=n_episodes,
                           sweep=list(sweep))
        events = [{"agent": r.agent, "iterations": r.iterations,
                   "episode": r.episode_index,
                   "ttc": _json_float(r.merge_event[0]),
                   "tiv": _json_float(r.merge_event[1])}
                  for r in episode_results if r.merge_event is not None]
        _write_json({"format": EVENTS_FORMAT, "master_seed": master_seed,
                     "events": events},
                    os.path.join(out_dir, "merge_events.json"))
    if collect_results:
        return summaries, episode_results
    return summaries


def write_metrics_json(summaries, path, master_seed: int, episodes: int,
                       sweep: list):
    _write_json({
        "format": METRICS_FORMAT,
        "master_seed": master_seed,
        "episodes": episodes,
        "sweep": sweep,
        "results": [s.to_dict() for s in summaries],
    }, path)


def read_metrics_json(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("format") != METRICS_FORMAT:
        raise SchemaError(
            f"expected {METRICS_FORMAT}, got {data.get('format')!r}")
    return data


def _write_json(payload: dict, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -------------------------------------------------------------- case studies

def case_study(case_id: int) -> ScenarioConfig:
    """The three scripted merges; they differ only in the rear driver.

    The ego starts well back on the ramp at 12.8 m/s, reaching the merge
    zone around t=6, with two main-lane cars ahead of its projection and
    one approaching from behind. Case 1 makes the rear driver average: it
    stays distant and the ego merges in front. Case 2 makes it aggressive
    from the start: it closes fast and the ego must let it pass. Case 3
    turns it aggressive at t=3, after the approach already looked safe, so
    the planner has to notice the change from behaviour alone and abandon
    the merge-in-front track it was on.
    """
    if case_id not in (1, 2, 3):
        raise InvalidStateError(f"unknown case study {case_id}")
    vehicles = [
        VehicleSpec(x=130.0, y=3.7, vx=17.0, psi=0.3),
        VehicleSpec(x=45.0, y=3.7, vx=17.5, psi=0.5),
        VehicleSpec(x=-45.0, y=3.7, vx=14.0,
                    psi=0.5 if case_id != 2 else 0.9),
    ]
    overrides = {3.0: {2: 0.9}} if case_id == 3 else {}
    return ScenarioConfig(ego_x=8.0, ego_vx=12.8, vehicles=vehicles,
                          overrides=overrides, name=f"case{case_id}")
