"""Sweep the rule-based agent's percentile calibration.

For each percentile of the recorded merge-event distribution, derive
TTC/TIV cutoffs, run the rule-based agent over shared random scenarios,
and record how safety and merge rate trade off. Cutoffs below the hard
safety minimums are clamped up to them (the agent refuses lower ones);
such cells keep their raw values for reference.
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mergesim.baselines import AgentKind, RuleThresholds, \
    percentile_thresholds
from mergesim.cli import _load_merge_events
from mergesim.harness import (THRESHOLD_SWEEP_FORMAT, episode_scenario,
                              run_episode, summarize)
from mergesim.objective import RewardWeights

DEFAULT_PERCENTILES = (5, 10, 25, 50, 75, 90)


def sweep_cell(thresholds, n_episodes, master_seed):
    results = [run_episode(episode_scenario(master_seed, i),
                           AgentKind.RULE_BASED, master_seed=master_seed,
                           episode_index=i, thresholds=thresholds,
                           record_trace=False)
               for i in range(n_episodes)]
    return summarize(results)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", default="results/merge_events",
                        help="directory holding merge_events.json")
    parser.add_argument("--percentiles", default=",".join(
        str(p) for p in DEFAULT_PERCENTILES))
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/threshold_sweep.json")
    args = parser.parse_args()

    ttc_events, tiv_events = _load_merge_events(args.events)
    floor = RewardWeights()
    cells = []
    for pct in (int(tok) for tok in args.percentiles.split(",")):
        raw = percentile_thresholds(ttc_events, tiv_events, pct)
        applied = RuleThresholds(max(raw.ttc_safe, floor.ttc_min),
                                 max(raw.tiv_safe, floor.tiv_min))
        cell = sweep_cell(applied, args.episodes, args.seed)
        cells.append({
            "percentile": pct,
            "ttc_raw": raw.ttc_safe,
            "tiv_raw": raw.tiv_safe,
            "ttc_safe": applied.ttc_safe,
            "tiv_safe": applied.tiv_safe,
            "clamped": applied != raw,
            "safety_violation_rate": cell.safety_violation_rate,
            "merged_rate": cell.merged_rate,
            "mean_merge_time": cell.mean_merge_time,
            "se_merge_time": cell.se_merge_time,
            "mean_reward": cell.mean_reward,
            "se_reward": cell.se_reward,
            "hard_brake_rate": cell.hard_brake_rate,
            "give_way_rate": cell.give_way_rate,
        })
        print(f"p{pct:02d}: ttc={applied.ttc_safe:.2f}"
              f" tiv={applied.tiv_safe:.2f}"
              f" violation={cell.safety_violation_rate:.3f}"
              f" merged={cell.merged_rate:.2f}")

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w") as fh:
        json.dump({"format": THRESHOLD_SWEEP_FORMAT,
                   "master_seed": args.seed, "episodes": args.episodes,
                   "cells": cells}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"-> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
