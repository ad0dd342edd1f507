#!/usr/bin/env python3
"""Run the full disagreement-vs-ratio benchmark for one scenario.

Defaults reproduce the desk-scale S1 sweep (100 replications, external
ratios 0..8 plus the oracle arm). Figures can then be rendered from the
output directory with the companion figures tool, e.g.

    figures disagreement-curve --in out/results.csv \
        --summary out/summary.json --out out/disagreement.svg
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from fitr.cli import main as fitr_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default="S1")
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--kernel", default="linear",
                        choices=["linear", "gaussian", "auto-median"])
    parser.add_argument("--seed", type=int, default=20240801)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="bench-out")
    args = parser.parse_args()

    config = {
        "scenario": args.scenario,
        "n": args.n,
        "reps": args.reps,
        "external_ratios": [0, 1, 2, 4, 8, "inf"],
        "methods": ["sepl", "fitr_ramp", "fitr_intl"],
        "kernel": args.kernel,
        "seed": args.seed,
        "workers": args.workers,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh)
        config_path = fh.name
    code = fitr_main(["simulate", "--config", config_path, "--out", args.out])
    Path(config_path).unlink()
    if code == 0:
        print(f"results written to {args.out}/results.csv")
    return code


if __name__ == "__main__":
    sys.exit(main())
