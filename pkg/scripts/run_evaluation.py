"""Batch evaluation: every agent over shared scenarios, sweeping the
planner's iteration budget.

Writes metrics.json and merge_events.json to the output directory.
Worker processes come from MERGESIM_WORKERS unless --workers is given.
The full default run (6 agents x 5 budgets x 50 episodes) takes a few
hours on one core; start with --episodes 5 to sanity-check.
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mergesim.harness import evaluate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agents", default="all")
    parser.add_argument("--episodes", type=int, default=50)
    parser.add_argument("--iters-sweep", default="1,4,16,64,256")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/evaluation")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    from mergesim.cli import _parse_agents
    kinds = _parse_agents(args.agents)
    sweep = tuple(int(tok) for tok in args.iters_sweep.split(","))
    start = time.monotonic()
    summaries = evaluate(kinds, n_episodes=args.episodes, sweep=sweep,
                         master_seed=args.seed, out_dir=args.out,
                         workers=args.workers)
    elapsed = time.monotonic() - start
    for s in summaries:
        iters = "-" if s.iterations is None else s.iterations
        print(f"{s.agent:>12} iters={iters:>4} "
              f"violation={s.safety_violation_rate:.3f} "
              f"reward={s.mean_reward:.2f}")
    print(f"wall time: {elapsed:.0f}s -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
