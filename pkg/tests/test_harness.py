"""Episode harness, persistence, and batch evaluation tests."""

import json
import os

import numpy as np
import pytest

from mergesim.baselines import AgentKind
from mergesim.belief import generative_step
from mergesim.driver import params_from_aggressiveness
from mergesim.errors import InvalidStateError, SchemaError
from mergesim.kinematics import VehicleAction
from mergesim.objective import RewardWeights
from mergesim.rng import RandomStream
from mergesim.harness import (
    EPISODE_FORMAT,
    EVENTS_FORMAT,
    METRICS_FORMAT,
    SCENARIO_FORMAT,
    TRACE_FORMAT,
    WORKERS_ENV,
    ScenarioConfig,
    VehicleSpec,
    case_study,
    evaluate,
    generate_random_scenario,
    load_scenario,
    read_metrics_json,
    read_trace_csv,
    run_episode,
    save_scenario,
    summarize,
    trace_columns,
    validate_trace,
    worker_count,
    write_episode_json,
    write_trace_csv,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")


def tiny_scenario(time_limit=12.0, ego_x=60.0):
    """One slow leader and one distant follower; resolves quickly."""
    vehicles = [VehicleSpec(x=120.0, y=3.7, vx=16.0, psi=0.4),
                VehicleSpec(x=-40.0, y=3.7, vx=15.0, psi=0.6)]
    return ScenarioConfig(ego_x=ego_x, ego_vx=14.0, vehicles=vehicles,
                          time_limit=time_limit, name="tiny")


class TestScenarioConfig:
    def test_case_studies_validate(self):
        for case in (1, 2, 3):
            case_study(case).validate()

    def test_ego_off_ramp_rejected(self):
        with pytest.raises(InvalidStateError):
            tiny_scenario(ego_x=250.0).validate()

    def test_negative_speed_rejected(self):
        sc = tiny_scenario()
        sc.vehicles[0] = VehicleSpec(x=120.0, y=3.7, vx=-1.0, psi=0.4)
        with pytest.raises(InvalidStateError):
            sc.validate()

    def test_bad_psi_rejected(self):
        sc = tiny_scenario()
        sc.vehicles[0] = VehicleSpec(x=120.0, y=3.7, vx=16.0, psi=1.5)
        with pytest.raises(InvalidStateError):
            sc.validate()

    def test_overlap_rejected(self):
        sc = tiny_scenario()
        sc.vehicles.append(VehicleSpec(x=120.0, y=3.7, vx=18.0, psi=0.2))
        with pytest.raises(InvalidStateError):
            sc.validate()

    def test_override_index_checked(self):
        sc = tiny_scenario()
        sc.overrides = {3.0: {7: 0.9}}
        with pytest.raises(InvalidStateError):
            sc.validate()

    def test_override_psi_checked(self):
        sc = tiny_scenario()
        sc.overrides = {3.0: {0: 1.5}}
        with pytest.raises(InvalidStateError):
            sc.validate()

    def test_dict_round_trip(self):
        sc = case_study(3)
        assert ScenarioConfig.from_dict(sc.to_dict()) == sc

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "scenario.json"
        save_scenario(case_study(2), path)
        assert load_scenario(path) == case_study(2)
        data = json.loads(path.read_text())
        assert data["format"] == SCENARIO_FORMAT

    def test_wrong_format_tag_rejected(self, tmp_path):
        data = case_study(1).to_dict()
        data["format"] = "mergesim.trace.v1"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(SchemaError):
            load_scenario(path)

    def test_shipped_configs_match_builtins(self):
        for case in (1, 2, 3):
            path = os.path.join(CONFIG_DIR, f"case{case}.json")
            assert load_scenario(path) == case_study(case)


class TestRandomScenario:
    def test_deterministic_in_seed(self):
        assert generate_random_scenario(42) == generate_random_scenario(42)
        assert generate_random_scenario(42) != generate_random_scenario(43)

    def test_population_bounds(self):
        for seed in range(30):
            sc = generate_random_scenario(seed)
            sc.validate()
            assert 4 <= len(sc.vehicles) <= 7
            assert 40.0 <= sc.ego_x < 80.0
            assert 8.0 <= sc.ego_vx < 15.0
            for spec in sc.vehicles:
                assert 14.0 <= spec.vx < 24.0
                assert 0.0 <= spec.psi < 1.0

    def test_spacing_exceeds_jam_distance(self):
        for seed in range(30):
            sc = generate_random_scenario(seed)
            for front, rear in zip(sc.vehicles, sc.vehicles[1:]):
                gap = front.x - rear.x
                d_min = params_from_aggressiveness(rear.psi).d_min
                assert gap > d_min

    def test_accepts_tuple_seed(self):
        a = generate_random_scenario((0, 5, 0))
        b = generate_random_scenario((0, 5, 0))
        assert a == b != generate_random_scenario((0, 6, 0))

    def test_no_spawn_emergency(self):
        # A driver spawned inside another's (or the ego projection's)
        # desired gap would open the episode braking at the physical
        # limit; the first second must stay above the hard-brake level.
        b_hard = RewardWeights().b_hard
        for seed in range(20):
            sc = generate_random_scenario(seed)
            stream = RandomStream(np.random.default_rng(seed))
            traffic = sc.build_traffic(stream)
            for _ in range(10):
                out = generative_step(
                    traffic, VehicleAction(ax=0.0, vy=0.0), stream,
                    observe=False)
                traffic = out.state
                assert min(out.driver_accels) > b_hard


class TestRunEpisode:
    def test_rule_based_episode_completes(self):
        r = run_episode(tiny_scenario(), AgentKind.RULE_BASED)
        assert r.outcome in ("merged", "timeout", "safety-violated")
        assert r.agent == "rule-based"
        assert r.iterations is None
        assert r.decisions and all(d.arms is None for d in r.decisions)

    def test_outcome_flag_consistency(self):
        r = run_episode(tiny_scenario(), AgentKind.RULE_BASED)
        if r.violated:
            assert r.outcome == "safety-violated"
        elif r.merge_time is not None:
            assert r.outcome == "merged"
        else:
            assert r.outcome == "timeout"
        if r.merge_time is not None:
            assert r.merge_time <= r.final_time + 1e-9

    def test_timeout_when_zone_unreachable(self):
        sc = tiny_scenario(time_limit=1.0, ego_x=5.0)
        r = run_episode(sc, AgentKind.RULE_BASED)
        assert r.outcome == "timeout"
        assert r.merge_time is None
        assert r.final_time == pytest.approx(1.0)

    def test_deterministic_given_seed(self):
        kw = dict(iterations=8, master_seed=5, episode_index=2)
        a = run_episode(tiny_scenario(), AgentKind.LVT, **kw)
        b = run_episode(tiny_scenario(), AgentKind.LVT, **kw)
        assert a.trace == b.trace
        assert a.reward == b.reward
        assert [d.policy for d in a.decisions] == \
               [d.policy for d in b.decisions]
        c = run_episode(tiny_scenario(), AgentKind.LVT, iterations=8,
                        master_seed=6, episode_index=2)
        assert a.trace != c.trace or a.reward != c.reward

    def test_rule_based_ignores_master_seed(self):
        a = run_episode(tiny_scenario(), AgentKind.RULE_BASED, master_seed=0)
        b = run_episode(tiny_scenario(), AgentKind.RULE_BASED, master_seed=9)
        assert a.trace == b.trace

    def test_trace_structure(self):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        width = len(trace_columns(len(sc.vehicles)))
        assert all(len(row) == width for row in r.trace)
        assert r.trace[0][1] == 0.0
        assert r.trace[-1][2] == ""          # terminal row has no action
        assert all(row[0] == TRACE_FORMAT for row in r.trace)
        steps = round(r.final_time / 0.1)
        assert len(r.trace) == steps + 1

    def test_decision_times_increase(self):
        r = run_episode(tiny_scenario(), AgentKind.RULE_BASED)
        times = [d.t for d in r.decisions]
        assert times == sorted(times)
        assert times[0] == 0.0

    def test_planner_decision_arms(self):
        r = run_episode(tiny_scenario(time_limit=3.0), AgentKind.MCTS_NORMAL,
                        iterations=16, master_seed=1)
        first = r.decisions[0]
        assert first.arms is not None
        assert 1 <= len(first.arms) <= 5
        assert sum(visits for _, visits, _ in first.arms) == 16

    def test_override_changes_future_only(self):
        base = run_episode(case_study(1), AgentKind.RULE_BASED)
        overridden = run_episode(case_study(3), AgentKind.RULE_BASED)
        # identical prefix while the rear driver is still average
        n_shared = 0
        for a, b in zip(base.trace, overridden.trace):
            if a != b:
                break
            n_shared += 1
        assert n_shared >= 30                # 3 s of identical motion
        assert base.trace[:30] == overridden.trace[:30]
        assert overridden.trace != base.trace

    def test_belief_snapshots_only_for_filtering_agents(self):
        lvt = run_episode(tiny_scenario(time_limit=2.0), AgentKind.LVT,
                          iterations=4)
        normal = run_episode(tiny_scenario(time_limit=2.0),
                             AgentKind.MCTS_NORMAL, iterations=4)
        assert all(d.belief is not None for d in lvt.decisions)
        assert all(d.belief is None for d in normal.decisions)
        snap = lvt.decisions[-1].belief
        assert len(snap) == 2
        for entry in snap:
            probs = entry["aggressiveness"]
            assert sum(probs) == pytest.approx(1.0)
            assert 0.0 <= entry["attentive"] <= 1.0


class TestTracePersistence:
    def test_csv_round_trip_and_replay(self, tmp_path):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        path = tmp_path / "trace.csv"
        write_trace_csv(r, path)
        rows = read_trace_csv(path)
        assert len(rows) == len(r.trace)
        assert rows[0]["ego_x"] == pytest.approx(sc.ego_x)
        assert rows[-1]["ego_ax"] is None
        validate_trace(rows, len(sc.vehicles))

    def test_byte_identical_rewrite(self, tmp_path):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_trace_csv(r, p1)
        write_trace_csv(r, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_replay_detects_tampering(self, tmp_path):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        path = tmp_path / "trace.csv"
        write_trace_csv(r, path)
        rows = read_trace_csv(path)
        rows[3]["ego_x"] += 0.5
        with pytest.raises(InvalidStateError):
            validate_trace(rows, len(sc.vehicles))

    def test_header_drift_rejected(self, tmp_path):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        path = tmp_path / "trace.csv"
        write_trace_csv(r, path)
        lines = path.read_text().splitlines()
        lines[0] = lines[0].replace("ego_x", "ego_pos")
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaError):
            read_trace_csv(path)

    def test_schema_cell_drift_rejected(self, tmp_path):
        sc = tiny_scenario()
        r = run_episode(sc, AgentKind.RULE_BASED)
        path = tmp_path / "trace.csv"
        write_trace_csv(r, path)
        text = path.read_text().replace(TRACE_FORMAT, "mergesim.trace.v0", 2)
        path.write_text(text)
        with pytest.raises(SchemaError):
            read_trace_csv(path)

    def test_episode_json_payload(self, tmp_path):
        r = run_episode(tiny_scenario(), AgentKind.RULE_BASED)
        path = tmp_path / "episode.json"
        write_episode_json(r, path)
        data = json.loads(path.read_text())
        assert data["format"] == EPISODE_FORMAT
        assert data["agent"] == "rule-based"
        assert data["outcome"] == r.outcome
        assert len(data["decisions"]) == len(r.decisions)
        json.dumps(data)                     # strictly serialisable


class TestEvaluate:
    def test_tiny_sweep(self, tmp_path):
        summaries, results = evaluate(
            [AgentKind.RULE_BASED, AgentKind.MCTS_NORMAL],
            n_episodes=2, sweep=(2,), master_seed=3,
            out_dir=tmp_path, collect_results=True)
        by_agent = {s.agent: s for s in summaries}
        assert by_agent["rule-based"].iterations is None
        assert by_agent["mcts-normal"].iterations == 2
        for s in summaries:
            assert s.episodes == 2
            for rate in (s.safety_violation_rate, s.hard_brake_rate,
                         s.give_way_rate, s.merged_rate):
                assert 0.0 <= rate <= 1.0

        # paired scenarios: both agents face the same board per index
        sizes = {}
        for r in results:
            sizes.setdefault(r.episode_index, set()).add(r.n_vehicles)
        assert all(len(v) == 1 for v in sizes.values())

        data = read_metrics_json(tmp_path / "metrics.json")
        assert data["master_seed"] == 3
        assert len(data["results"]) == 2
        events = json.loads((tmp_path / "merge_events.json").read_text())
        assert events["format"] == EVENTS_FORMAT

    def test_metric_consistency(self, tmp_path):
        summaries, results = evaluate(
            [AgentKind.RULE_BASED], n_episodes=3, master_seed=1,
            collect_results=True)
        cell = summaries[0]
        assert cell.safety_violation_rate == pytest.approx(
            sum(r.violated for r in results) / len(results))
        assert cell.merged_rate == pytest.approx(
            sum(r.merge_time is not None for r in results) / len(results))

    def test_metrics_format_checked(self, tmp_path):
        path = tmp_path / "metrics.json"
        path.write_text(json.dumps({"format": "nope"}))
        with pytest.raises(SchemaError):
            read_metrics_json(path)

    def test_summarize_single_episode(self):
        r = run_episode(tiny_scenario(), AgentKind.RULE_BASED)
        cell = summarize([r])
        assert cell.episodes == 1
        assert cell.se_reward == 0.0

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.delenv(WORKERS_ENV, raising=False)
        assert worker_count() == 1
        monkeypatch.setenv(WORKERS_ENV, "4")
        assert worker_count() == 4
        monkeypatch.setenv(WORKERS_ENV, "soon")
        with pytest.raises(InvalidStateError):
            worker_count()


class TestCaseStudies:
    def test_only_rear_driver_differs(self):
        one, two, three = (case_study(i) for i in (1, 2, 3))
        assert one.ego_x == two.ego_x == three.ego_x
        assert one.vehicles[:2] == two.vehicles[:2] == three.vehicles[:2]
        assert [v.x for v in one.vehicles] == [v.x for v in two.vehicles]
        assert one.vehicles[2].psi == 0.5
        assert two.vehicles[2].psi == 0.9
        assert three.vehicles[2].psi == 0.5
        assert three.overrides == {3.0: {2: 0.9}}
        assert not one.overrides and not two.overrides

    def test_unknown_case_rejected(self):
        with pytest.raises(InvalidStateError):
            case_study(4)
