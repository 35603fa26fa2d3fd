#!/usr/bin/env python3
"""Run the full battery of desk-scale experiments and collect their CSVs.

Writes one CSV per experiment under the output directory plus a summary
line per check on stdout.  Exit code 0 only if every check passes.

Usage: python scripts/run_desk_suite.py [--out-dir results] [--seed 1]
"""

import argparse
import sys
from pathlib import Path

from junta_lab.harness import ExperimentConfig, desk_params, run_all

BATTERY = [
    # (experiment, n, epsilon, trials)
    ("verify_yes", 10, 0.1, 500),
    ("verify_no", 10, 0.1, 200),
    ("verify_d1", 10, 0.05, 100),
    ("verify_d2", 10, 2.0**-7, 100),
    ("game", 14, 0.01, 10_000),
    ("sseq_curve", 10, 0.1, 1000),
    ("dtv_sweep", 10, 0.1, 1),
    ("claim53", 10, 0.1, 1),
    ("goodM", 12, 0.1, 10_000),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for experiment, n, epsilon, trials in BATTERY:
        config = ExperimentConfig(
            params=desk_params(n, epsilon=epsilon),
            experiment=experiment,
            trials=trials,
            seed=args.seed,
            output_path=str(out_dir / f"{experiment}.csv"),
        )
        code, report = run_all(config)
        failures += code
        for check in report.checks:
            verdict = "PASS" if check.passed else "FAIL"
            print(f"{verdict} {experiment}/{check.name}: {check.detail}")
    print(f"wrote CSVs to {out_dir}/")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
