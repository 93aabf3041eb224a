"""Command-line front end.

Three verbs: ``run-episode`` simulates one merge and optionally writes
the trace and decision log, ``evaluate`` sweeps planner iteration
budgets over shared random scenarios, and ``thresholds`` reports the
rule-based agent's safety cutoffs, either the shipped calibration or
one recomputed from recorded merge events.
"""

import argparse
import json
import os
import sys

from .baselines import SHIPPED_THRESHOLDS, AgentKind, percentile_thresholds
from .errors import InvalidStateError, SchemaError
from .harness import (
    DEFAULT_ITERATIONS,
    EVENTS_FORMAT,
    case_study,
    evaluate,
    load_scenario,
    run_episode,
    save_scenario,
    write_episode_json,
    write_trace_csv,
)

_CASES = {"case1": 1, "case2": 2, "case3": 3}


def _resolve_scenario(token: str):
    if token in _CASES:
        return case_study(_CASES[token])
    if not os.path.exists(token):
        raise InvalidStateError(f"no such scenario file: {token}")
    return load_scenario(token)


def _parse_agents(raw: str) -> list[AgentKind]:
    if raw == "all":
        return list(AgentKind)
    kinds = []
    for token in raw.split(","):
        token = token.strip()
        try:
            kinds.append(AgentKind(token))
        except ValueError:
            names = ", ".join(k.value for k in AgentKind)
            raise InvalidStateError(
                f"unknown agent {token!r}; expected one of: {names}, all")
    return kinds


def _cmd_run_episode(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    kind = _parse_agents(args.agent)[0]
    result = run_episode(scenario, kind, iterations=args.iters,
                         master_seed=args.seed)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_trace_csv(result, os.path.join(args.out, "trace.csv"))
        write_episode_json(result, os.path.join(args.out, "episode.json"))
        save_scenario(scenario, os.path.join(args.out, "scenario.json"))
    merge = "-" if result.merge_time is None else f"{result.merge_time:.1f}s"
    print(f"{scenario.name or 'scenario'} {kind.value}: {result.outcome}"
          f" merge={merge} reward={result.reward:.2f}"
          f" decisions={len(result.decisions)}")
    return 0


def _cmd_evaluate(args) -> int:
    kinds = _parse_agents(args.agents)
    sweep = tuple(int(tok) for tok in args.iters_sweep.split(","))
    if any(n <= 0 for n in sweep):
        raise InvalidStateError("iteration counts must be positive")
    summaries = evaluate(kinds, n_episodes=args.episodes, sweep=sweep,
                         master_seed=args.seed, out_dir=args.out,
                         workers=args.workers)
    print(f"{'agent':>12} {'iters':>6} {'violation':>9} "
          f"{'reward':>14} {'merge time':>14}")
    for s in summaries:
        iters = "-" if s.iterations is None else str(s.iterations)
        merge = "-" if s.mean_merge_time is None else \
            f"{s.mean_merge_time:6.2f} ±{s.se_merge_time:.2f}"
        print(f"{s.agent:>12} {iters:>6} {s.safety_violation_rate:9.3f} "
              f"{s.mean_reward:7.2f} ±{s.se_reward:.2f} {merge:>14}")
    return 0


def _load_merge_events(path):
    """TTC/TIV pairs from an evaluation's merge_events.json."""
    if os.path.isdir(path):
        path = os.path.join(path, "merge_events.json")
    with open(path) as fh:
        data = json.load(fh)
    if data.get("format") != EVENTS_FORMAT:
        raise SchemaError(
            f"expected {EVENTS_FORMAT}, got {data.get('format')!r}")
    inf = float("inf")
    ttc = [inf if e["ttc"] is None else e["ttc"] for e in data["events"]]
    tiv = [inf if e["tiv"] is None else e["tiv"] for e in data["events"]]
    return ttc, tiv


def _cmd_thresholds(args) -> int:
    if args.events is None:
        if args.percentile not in SHIPPED_THRESHOLDS:
            shipped = ", ".join(str(p) for p in sorted(SHIPPED_THRESHOLDS))
            raise InvalidStateError(
                f"no shipped calibration for percentile {args.percentile};"
                f" have {shipped}. Pass --from to recompute.")
        cut = SHIPPED_THRESHOLDS[args.percentile]
        source = "shipped"
    else:
        ttc, tiv = _load_merge_events(args.events)
        cut = percentile_thresholds(ttc, tiv, args.percentile)
        source = "recomputed"
    print(json.dumps({"percentile": args.percentile, "source": source,
                      "ttc_safe": cut.ttc_safe, "tiv_safe": cut.tiv_safe}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mergesim",
        description="Highway-merge simulator and planner benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run-episode", help="simulate one merge episode")
    run.add_argument("--scenario", required=True,
                     help="scenario JSON file, or case1 / case2 / case3")
    run.add_argument("--agent", default=AgentKind.LVT.value,
                     help="agent kind (default %(default)s)")
    run.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS,
                     help="search iterations per decision"
                          " (default %(default)s)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", help="directory for trace.csv, episode.json,"
                                   " scenario.json")
    run.set_defaults(func=_cmd_run_episode)

    ev = sub.add_parser("evaluate", help="batch iteration sweep")
    ev.add_argument("--agents", default="all",
                    help="comma-separated agent kinds, or all"
                         " (default %(default)s)")
    ev.add_argument("--episodes", type=int, default=100)
    ev.add_argument("--iters-sweep", default="1,4,16,64,256,1024")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="directory for metrics.json and"
                                  " merge_events.json")
    ev.add_argument("--workers", type=int, default=None,
                    help="process count (default: MERGESIM_WORKERS or 1)")
    ev.set_defaults(func=_cmd_evaluate)

    th = sub.add_parser("thresholds", help="rule-based safety cutoffs")
    th.add_argument("--percentile", type=int, default=50)
    th.add_argument("--from", dest="events", default=None,
                    help="evaluation output dir (or merge_events.json) to"
                         " recompute from")
    th.set_defaults(func=_cmd_thresholds)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidStateError, SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
