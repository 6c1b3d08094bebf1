#!/usr/bin/env python3
"""Run the four data-producing experiments at the published operating
point and collect their CSVs under one output directory.

Usage: python scripts/reproduce_results.py [OUTDIR] [--seed N] [--shots N]

Produces:
  OUTDIR/fringe/        mean signals versus input phase
  OUTDIR/gain_sweep/    clone numbers and visibility models versus gain
  OUTDIR/distribution/  joint photon-number table at g = 1.6 (both states)
  OUTDIR/filter_sweep/  visibility versus retained fraction
"""

import argparse
import sys
import tempfile
from pathlib import Path

from qiopa.cli import main as qiopa_main

GAIN_GRID = "0,0.25,0.5,0.75,1.0,1.5,2.0,2.5,3.0,3.5,4.0,4.34"
FILTER_GRID = "0,5,10,20,35,50,75,100,150,200,250"


def run(argv):
    print("qiopa", " ".join(argv))
    code = qiopa_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("outdir", nargs="?", default="out")
    parser.add_argument("--seed", type=int, default=20250607)
    parser.add_argument("--shots", type=int, default=2500)
    args = parser.parse_args()
    out = Path(args.outdir)

    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        fh.write(f"run.shots_per_point = {args.shots}\n")
        fh.write(f"run.seed = {args.seed}\n")
        config = fh.name

    run(["fringe", "--config", config, "--out", str(out / "fringe")])
    run(["gain-sweep", "--config", config, "--g-values", GAIN_GRID,
         "--out", str(out / "gain_sweep")])
    run(["distribution", "--g", "1.6", "--kind", "phi-plus",
         "--out", str(out / "distribution" / "phi_plus")])
    run(["distribution", "--g", "1.6", "--kind", "phi-minus",
         "--out", str(out / "distribution" / "phi_minus")])
    run(["filter-sweep", "--config", config, "--q-values", FILTER_GRID,
         "--out", str(out / "filter_sweep")])
    print(f"done; outputs under {out}/")


if __name__ == "__main__":
    main()
