"""Run the three scripted case studies and save their artefacts.

Each case directory receives trace.csv, episode.json, and the scenario
file, which is everything the plotting side needs to draw the
position/speed panels and the belief evolution.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mergesim.baselines import AgentKind
from mergesim.harness import (case_study, run_episode, save_scenario,
                              write_episode_json, write_trace_csv)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agent", default=AgentKind.LVT.value)
    parser.add_argument("--iters", type=int, default=150)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/case_studies")
    args = parser.parse_args()

    kind = AgentKind(args.agent)
    for case in (1, 2, 3):
        scenario = case_study(case)
        result = run_episode(scenario, kind, iterations=args.iters,
                             master_seed=args.seed)
        out = os.path.join(args.out, f"case{case}")
        os.makedirs(out, exist_ok=True)
        write_trace_csv(result, os.path.join(out, "trace.csv"))
        write_episode_json(result, os.path.join(out, "episode.json"))
        save_scenario(scenario, os.path.join(out, "scenario.json"))
        merge = "-" if result.merge_time is None else \
            f"{result.merge_time:.1f}s"
        gave_way = [round(d.t, 1) for d in result.decisions
                    if d.policy.name == "GIVE_WAY"]
        print(f"case{case}: {result.outcome} merge={merge}"
              f" give_way_at={gave_way} -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
