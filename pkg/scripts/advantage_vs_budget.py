#!/usr/bin/env python3
"""Trace how the optimal distinguishing advantage grows with query budget.

For a universe of m elements and uniform per-element counts, prints one
CSV row per budget with the exact optimal advantage and, for comparison,
the advantage bound implied by summing per-element total variations.

Usage: python scripts/advantage_vs_budget.py [--n 64] [--m 8] [--steps 17]
"""

import argparse
import sys

from junta_lab.binom_stats import hit_prob
from junta_lab.harness import desk_params
from junta_lab.tasks import ElementQueryPlan, exact_optimal_advantage


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--epsilon", type=float, default=0.1)
    parser.add_argument("--m", type=int, default=8)
    parser.add_argument("--steps", type=int, default=17)
    args = parser.parse_args()

    params = desk_params(args.n, epsilon=args.epsilon)
    print("budget,advantage,per_element_tv_sum")
    for step in range(args.steps):
        plan = ElementQueryPlan.uniform(args.m, step)
        advantage = exact_optimal_advantage(plan, params)
        lam = hit_prob(step, params.epsilon, params.n)
        naive = min(1.0, args.m * (params.q - params.p) * lam)
        print(f"{step * args.m},{advantage:.12g},{naive:.12g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
