"""Observation model and beliefs over hidden driver state.

Hidden per-vehicle state is (aggressiveness, attentiveness). The filter
tracks it on a fixed grid: 11 aggressiveness values {0.0, 0.1, ..., 1.0}
crossed with attentive yes/no, 22 cells per vehicle, independent across
vehicles. Positions are observed with Gaussian noise; speeds are observed
exactly, so finite-differenced accelerations give a sharp likelihood for
comparing driver hypotheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .driver import (
    B_HARD_PHYSICAL,
    FREE_ROAD_GAP,
    DEFAULT_ANCHORS,
    DriverAnchors,
    InternalState,
    TrafficState,
    driver_action,
    make_internal,
    params_from_aggressiveness,
    time_to_merge,
)
from .errors import SimulationIntegrityError
from .kinematics import (
    DT,
    RoadGeometry,
    VehicleAction,
    VehicleState,
    in_main_corridor,
    step_vehicle,
)
from .rng import RandomStream

SIGMA_ACCEL = 0.3
HISTORY_CAP = 64


@dataclass(frozen=True, slots=True)
class NoiseScales:
    sigma_x: float = 1.0
    sigma_y: float = 0.2


@dataclass(frozen=True, slots=True)
class ObservationVector:
    """What the planner sees: noisy non-ego positions, exact speeds, exact ego."""

    t: float
    ego: VehicleState
    vehicles: tuple[VehicleState, ...]


class StepResult:
    __slots__ = ("state", "observation", "driver_accels")

    def __init__(self, state, observation, driver_accels):
        self.state = state
        self.observation = observation
        self.driver_accels = driver_accels


def _check_no_pass_through(before: TrafficState, after: TrafficState) -> None:
    """Same-corridor vehicles must not swap longitudinal order in one step.

    A swap inside 0.1 s means they drove through each other; surfacing it
    beats silently continuing from a non-physical state.
    """
    road = before.road
    bodies_before = [before.ego] + list(before.vehicles)
    bodies_after = [after.ego] + list(after.vehicles)
    n = len(bodies_before)
    for i in range(n):
        for j in range(i + 1, n):
            same_before = (in_main_corridor(bodies_before[i], road)
                           == in_main_corridor(bodies_before[j], road))
            same_after = (in_main_corridor(bodies_after[i], road)
                          == in_main_corridor(bodies_after[j], road))
            if not (same_before and same_after):
                continue
            d0 = bodies_before[j].x - bodies_before[i].x
            d1 = bodies_after[j].x - bodies_after[i].x
            if d0 == 0.0 or d1 == 0.0 or (d0 > 0) != (d1 > 0):
                labels = ["ego"] + [f"vehicle {k}" for k in range(n - 1)]
                raise SimulationIntegrityError(
                    f"{labels[i]} and {labels[j]} overlapped between "
                    f"t={before.t:.1f} and t={after.t:.1f} "
                    f"(x: {bodies_before[i].x:.3f}/{bodies_before[j].x:.3f} -> "
                    f"{bodies_after[i].x:.3f}/{bodies_after[j].x:.3f})")


def generative_step(traffic: TrafficState, ego_action: VehicleAction,
                    stream: RandomStream, noise: NoiseScales | None = None,
                    observe: bool = True) -> StepResult:
    """Advance the world one 0.1 s tick and emit a noisy observation.

    Every driver reacts to the current state simultaneously, then all
    vehicles (ego included) integrate. noise=None means exact
    observation; observe=False skips building one entirely (for callers
    that never look at it, e.g. search without belief updates).
    """
    accels = [driver_action(i, traffic).ax for i in range(len(traffic.vehicles))]
    next_vehicles = [
        step_vehicle(v, VehicleAction(ax=a)) for v, a in
        zip(traffic.vehicles, accels)]
    next_ego = step_vehicle(traffic.ego, ego_action)
    nxt = TrafficState(t=traffic.t + DT, ego=next_ego, vehicles=next_vehicles,
                       internals=traffic.internals, road=traffic.road)
    _check_no_pass_through(traffic, nxt)

    if not observe:
        return StepResult(nxt, None, accels)
    return StepResult(nxt, observation_of(nxt, stream, noise), accels)


def observation_of(traffic: TrafficState, stream: RandomStream,
                   noise: NoiseScales | None = None) -> ObservationVector:
    """Noisy view of an existing state; ego and all speeds stay exact."""
    if noise is None:
        observed = tuple(traffic.vehicles)
    else:
        observed = tuple(
            VehicleState(x=v.x + noise.sigma_x * stream.normal(),
                         y=v.y + noise.sigma_y * stream.normal(),
                         vx=v.vx)
            for v in traffic.vehicles)
    return ObservationVector(t=traffic.t, ego=traffic.ego, vehicles=observed)


# --- grid filter -----------------------------------------------------------

N_AGGRESSIVENESS = 11
N_CELLS = N_AGGRESSIVENESS * 2


class HypothesisGrid:
    """Precomputed per-cell driver parameters for vectorized prediction.

    Cell order is aggressiveness-major: index = 2*k + (0 attentive,
    1 inattentive) where k indexes {0.0, 0.1, ..., 1.0}.
    """

    def __init__(self, anchors: DriverAnchors = DEFAULT_ANCHORS,
                 sigma_accel: float = SIGMA_ACCEL):
        self.anchors = anchors
        self.sigma_accel = sigma_accel
        psi = np.repeat(np.linspace(0.0, 1.0, N_AGGRESSIVENESS), 2)
        att = np.tile(np.array([True, False]), N_AGGRESSIVENESS)
        self.psi = psi
        self.attentive = att
        self.internals = tuple(
            make_internal(float(p), attentive=bool(a), anchors=anchors)
            for p, a in zip(psi, att))
        self.v_des = np.array([s.idm.v_des for s in self.internals])
        self.d_min = np.array([s.idm.d_min for s in self.internals])
        self.t_des = np.array([s.idm.t_des for s in self.internals])
        self.a_max = np.array([s.idm.a_max for s in self.internals])
        self.two_sqrt_ab = 2.0 * np.sqrt(
            self.a_max * np.array([s.idm.b_max for s in self.internals]))

    def _idm_cells(self, vx, gap, dv):
        want = self.d_min + self.t_des * vx + vx * dv / self.two_sqrt_ab
        acc = self.a_max * (1.0 - (vx / self.v_des) ** 4 - (want / gap) ** 2)
        return np.clip(acc, -B_HARD_PHYSICAL, self.a_max)

    def predicted_accels(self, features: np.ndarray) -> np.ndarray:
        """(m, 8) feature rows -> (m, 22) accelerations, one per cell.

        Columns: vx, gap_lead, dv_lead, merge_applicable, gap_merge,
        dv_merge, ttm_ego, ttm_vehicle. Mirrors the ground-truth driver:
        per-term clamp, attentive-and-yielding gate, final clamp.
        """
        vx = features[:, 0:1]
        acc_lead = self._idm_cells(vx, features[:, 1:2], features[:, 2:3])
        applicable = features[:, 3:4] > 0.5
        acc_merge = self._idm_cells(vx, features[:, 4:5], features[:, 5:6])
        ttm_v = features[:, 7:8]
        with np.errstate(invalid="ignore"):
            threshold = np.where(self.psi >= 1.0, 0.0,
                                 (1.0 - self.psi) * ttm_v)
        yielding = applicable & self.attentive & (features[:, 6:7] < threshold)
        mixed = acc_lead + np.where(yielding, acc_merge, 0.0)
        return np.clip(mixed, -B_HARD_PHYSICAL, self.a_max)

    def transition_features(self, obs: ObservationVector,
                            road: RoadGeometry) -> np.ndarray:
        """Per-vehicle feature rows for the scene a transition started from."""
        ego = obs.ego
        ego_merged = in_main_corridor(ego, road)
        rows = np.empty((len(obs.vehicles), 8))
        for i, v in enumerate(obs.vehicles):
            gap_l, dv_l = FREE_ROAD_GAP, 0.0
            if in_main_corridor(v, road):
                best = None
                for j, other in enumerate(obs.vehicles):
                    if j != i and in_main_corridor(other, road) \
                            and other.x > v.x:
                        if best is None or other.x < best.x:
                            best = other
                if ego_merged and ego.x > v.x and \
                        (best is None or ego.x < best.x):
                    best = ego
                if best is not None:
                    gap_l, dv_l = best.x - v.x, v.vx - best.vx
            applicable = (not ego_merged) and ego.x > v.x
            if applicable:
                gap_m, dv_m = ego.x - v.x, v.vx - ego.vx
                ttm_e = time_to_merge(ego, road, agent=True)
                ttm_v = time_to_merge(v, road, agent=False)
            else:
                gap_m, dv_m, ttm_e, ttm_v = 1.0, 0.0, np.inf, np.inf
            rows[i] = (v.vx, gap_l, dv_l, 1.0 if applicable else 0.0,
                       gap_m, dv_m, ttm_e, ttm_v)
        return rows


@dataclass(frozen=True, slots=True)
class ActionObservation:
    """One executed ego action with the observation that followed it."""

    ego_action: VehicleAction
    observation: ObservationVector


class GridBelief:
    """Posterior over the hypothesis grid, independent per vehicle.

    probs has shape (n_vehicles, 22). anchor_obs is the last observation
    already absorbed; the next update chains its transitions from there,
    so sequential updates compose exactly. history keeps the most recent
    action/observation pairs for diagnostics.
    """

    __slots__ = ("grid", "road", "probs", "anchor_obs", "history")

    def __init__(self, grid: HypothesisGrid, road: RoadGeometry,
                 probs: np.ndarray, anchor_obs: ObservationVector | None,
                 history: tuple = ()):
        self.grid = grid
        self.road = road
        self.probs = probs
        self.anchor_obs = anchor_obs
        self.history = history

    @classmethod
    def uniform(cls, n_vehicles: int, road: RoadGeometry,
                anchor_obs: ObservationVector | None = None,
                grid: HypothesisGrid | None = None) -> "GridBelief":
        grid = grid or HypothesisGrid()
        probs = np.full((n_vehicles, N_CELLS), 1.0 / N_CELLS)
        return cls(grid, road, probs, anchor_obs)

    def updated(self, trajectory: tuple[ActionObservation, ...]) -> "GridBelief":
        """Condition on a run of action/observation pairs."""
        if not trajectory:
            return self
        chain = [p.observation for p in trajectory]
        if self.anchor_obs is not None:
            chain.insert(0, self.anchor_obs)
        n = self.probs.shape[0]
        if len(chain) < 2 or n == 0:
            return GridBelief(self.grid, self.road, self.probs, chain[-1],
                              self._extend_history(trajectory))
        feats = np.concatenate([
            self.grid.transition_features(o, self.road) for o in chain[:-1]])
        accel_obs = np.concatenate([
            [(b.vehicles[i].vx - a.vehicles[i].vx) / DT for i in range(n)]
            for a, b in zip(chain[:-1], chain[1:])])
        predicted = self.grid.predicted_accels(feats)
        z = (accel_obs[:, None] - predicted) / self.grid.sigma_accel
        loglik = (-0.5 * z * z).reshape(-1, n, N_CELLS).sum(axis=0)
        with np.errstate(divide="ignore"):
            logpost = np.log(self.probs) + loglik
        peak = logpost.max(axis=1, keepdims=True)
        bad = ~np.isfinite(peak[:, 0])
        if bad.any():
            logpost[bad] = 0.0
            peak[bad] = 0.0
        post = np.exp(logpost - peak)
        post /= post.sum(axis=1, keepdims=True)
        return GridBelief(self.grid, self.road, post, chain[-1],
                          self._extend_history(trajectory))

    def _extend_history(self, trajectory):
        return (self.history + tuple(trajectory))[-HISTORY_CAP:]

    def sample(self, stream: RandomStream) -> tuple[InternalState, ...]:
        cells = self.probs.cumsum(axis=1)
        return tuple(self.grid.internals[stream.categorical(row)]
                     for row in cells)

    def aggressiveness_marginal(self, vehicle: int) -> np.ndarray:
        return self.probs[vehicle].reshape(N_AGGRESSIVENESS, 2).sum(axis=1)

    def attentive_marginal(self, vehicle: int) -> float:
        return float(self.probs[vehicle].reshape(N_AGGRESSIVENESS, 2)[:, 0].sum())

    def map_cell(self, vehicle: int) -> InternalState:
        return self.grid.internals[int(self.probs[vehicle].argmax())]


class StaticBelief:
    """Belief that ignores evidence; used by non-filtering planners.

    internals=None samples uniformly from the grid each call (flat prior),
    otherwise every sample returns the fixed internals (point mass).
    """

    __slots__ = ("grid", "n_vehicles", "internals")

    def __init__(self, n_vehicles: int,
                 internals: tuple[InternalState, ...] | None = None,
                 grid: HypothesisGrid | None = None):
        self.grid = grid or HypothesisGrid()
        self.n_vehicles = n_vehicles
        self.internals = internals

    def updated(self, trajectory) -> "StaticBelief":
        return self

    def sample(self, stream: RandomStream) -> tuple[InternalState, ...]:
        if self.internals is not None:
            return self.internals
        return tuple(self.grid.internals[stream.pick_index(N_CELLS)]
                     for _ in range(self.n_vehicles))
