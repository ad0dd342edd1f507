#!/usr/bin/env python3
"""Run the outcome-similarity sensitivity sweep (rho from 1.0 down to 0.4).

The per-rho table lands in sensitivity.json; the raw rows in results.csv
can be turned into the Markdown table with

    figures sensitivity-table --in out/results.csv --out out/table.md
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from fitr.cli import main as fitr_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--ratio", type=int, default=4)
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--seed", type=int, default=20240801)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", default="sensitivity-out")
    args = parser.parse_args()

    config = {
        "rhos": [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4],
        "n": args.n,
        "ratio": args.ratio,
        "reps": args.reps,
        "methods": ["sepl", "fitr_ramp", "fitr_intl"],
        "seed": args.seed,
        "workers": args.workers,
    }
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(config, fh)
        config_path = fh.name
    code = fitr_main(["sensitivity", "--config", config_path, "--out", args.out])
    Path(config_path).unlink()
    if code == 0:
        print(f"table written to {args.out}/sensitivity.json")
    return code


if __name__ == "__main__":
    sys.exit(main())
