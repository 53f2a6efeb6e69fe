#!/usr/bin/env python3
"""Two-state nonlinear study with the log-distance sensor bank.

Runs the unscented binary filter against the open-loop predictor and writes
the standard Monte Carlo reports, then prints the full-run improvement.
"""

import argparse
import json
import sys
from pathlib import Path

from binklf.cli import main as binklf_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/nonlinear")
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--steps", type=int, default=300)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--xi-scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    code = binklf_main([
        "mc", "--scenario", "nonlinear",
        "--runs", str(args.runs),
        "--steps", str(args.steps),
        "--seed", str(args.seed),
        "--xi-scale", str(args.xi_scale),
        "--out", args.out,
    ])
    if code != 0:
        return code

    summary = json.loads((Path(args.out) / "summary.json").read_text())
    filtered = summary["mean_rmse"]["nbklf"]
    open_loop = summary["mean_rmse"]["open_loop"]
    print(f"nbklf      mean rmse {filtered:.4f}"
          f"  mean m_k {summary['mean_mk']['nbklf']:.3f}")
    print(f"open_loop  mean rmse {open_loop:.4f}")
    print(f"improvement over open loop {1.0 - filtered / open_loop:.1%}")
    print(f"outputs in {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
