#!/usr/bin/env python3
"""Oxygen uptake study at the reference configuration.

Runs the four-estimator Monte Carlo comparison and writes rmse.csv, mk.csv,
timing.csv, and summary.json to the output directory, then prints the
steady-window mean RMSE per estimator.
"""

import argparse
import json
import sys
from pathlib import Path

from binklf.cli import main as binklf_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/o2")
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--sensor-count", type=int, default=10)
    args = parser.parse_args(argv)

    code = binklf_main([
        "mc", "--scenario", "o2",
        "--runs", str(args.runs),
        "--steps", str(args.steps),
        "--seed", str(args.seed),
        "--sensor-count", str(args.sensor_count),
        "--out", args.out,
    ])
    if code != 0:
        return code

    summary = json.loads((Path(args.out) / "summary.json").read_text())
    width = max(len(name) for name in summary["mean_rmse"])
    for name, value in sorted(summary["mean_rmse"].items(),
                              key=lambda kv: kv[1]):
        print(f"{name:<{width}}  mean rmse {value:.4f}"
              f"  mean m_k {summary['mean_mk'][name]:.3f}")
    print(f"outputs in {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
